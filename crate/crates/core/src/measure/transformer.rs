use std::sync::Arc;

use crate::ast::Span;
use crate::measure::FiniteMeasure;
use crate::typesys::BaseType;
use crate::value::CanonValue;
use crate::{Error, Result};

/// Keys a transformer can act on.
pub trait Key: Ord + Clone + Send + Sync + 'static {}
impl<K: Ord + Clone + Send + Sync + 'static> Key for K {}

type Func<A, B> = dyn Fn(&FiniteMeasure<A>) -> Result<FiniteMeasure<B>> + Send + Sync;

/// A partial map from finite measures on `A` to finite measures on `B`.
pub struct Transformer<A: Key, B: Key>(Arc<Func<A, B>>);

impl<A: Key, B: Key> Clone for Transformer<A, B> {
    fn clone(&self) -> Self {
        Transformer(self.0.clone())
    }
}

/// Tolerance on kernel total mass before `extend` refuses it.
pub const KERNEL_MASS_SLACK: f64 = 1e-9;

impl<A: Key, B: Key> Transformer<A, B> {
    pub fn apply(&self, mu: &FiniteMeasure<A>) -> Result<FiniteMeasure<B>> {
        (self.0)(mu)
    }

    /// Lift a function: `μ ↦ μ ∘ f⁻¹`.
    pub fn pure(f: impl Fn(&A) -> Result<B> + Send + Sync + 'static) -> Self {
        Transformer(Arc::new(move |mu: &FiniteMeasure<A>| mu.map(&f)))
    }

    /// `self >>> next`.
    pub fn then<C: Key>(self, next: Transformer<B, C>) -> Transformer<A, C> {
        Transformer(Arc::new(move |mu: &FiniteMeasure<A>| next.apply(&self.apply(mu)?)))
    }

    /// Run `t` on the part of the measure where `p` holds and `f` on the rest.
    pub fn choose(p: impl Fn(&A) -> Result<bool> + Send + Sync + 'static, t: Self, f: Self) -> Self {
        Transformer(Arc::new(move |mu: &FiniteMeasure<A>| {
            let mut yes = mu.empty_like();
            let mut no = mu.empty_like();
            for (k, w) in mu.iter() {
                if p(k)? {
                    yes.add_mass(k.clone(), w)?;
                } else {
                    no.add_mass(k.clone(), w)?;
                }
            }
            t.apply(&yes)?.add(&f.apply(&no)?)
        }))
    }
}

impl<A: Key> Transformer<A, A> {
    pub fn identity() -> Self {
        Transformer(Arc::new(|mu: &FiniteMeasure<A>| Ok(mu.clone())))
    }

    /// Unnormalized conditioning on `p(x) = 0_b`. Only discrete `b` is exact.
    pub fn constrain(
        base: BaseType,
        span: Span,
        p: impl Fn(&A) -> Result<CanonValue> + Send + Sync + 'static,
    ) -> Self {
        Transformer(Arc::new(move |mu: &FiniteMeasure<A>| {
            if base == BaseType::Real {
                return Err(Error::ContinuousObserve { span });
            }
            let mut out = mu.empty_like();
            for (k, w) in mu.iter() {
                if p(k)?.is_zero() {
                    out.add_mass(k.clone(), w)?;
                }
            }
            Ok(out)
        }))
    }
}

impl<A: Key, B: Key> Transformer<A, (A, B)> {
    /// Pair every point `x` with a draw from the sub-probability kernel `m(x)`.
    pub fn extend(m: impl Fn(&A) -> Result<FiniteMeasure<B>> + Send + Sync + 'static) -> Self {
        Transformer(Arc::new(move |mu: &FiniteMeasure<A>| {
            let mut out = mu.empty_like();
            for (x, w) in mu.iter() {
                let k = m(x)?;
                let mass = k.total();
                if mass > 1.0 + KERNEL_MASS_SLACK {
                    return Err(Error::KernelMass(mass));
                }
                for (y, v) in k.iter() {
                    out.add_mass((x.clone(), y.clone()), w * v)?;
                }
            }
            Ok(out)
        }))
    }
}
