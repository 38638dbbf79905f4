//! Translation from Fun to Imp through patterns and layouts.

mod layout;
mod pattern;
mod trans;

use std::collections::BTreeMap;

use serde_json::{json, Value as Json};

pub use layout::{check_layout, flatten, lift, restrict, Layout};
pub use pattern::{assign, Pattern};
pub use trans::{layout_for, Translator};

use crate::ast::Expr;
use crate::fun_sem::FunTransformer;
use crate::imp::{transform_imp, typecheck_imp, unroll_imp, Block, ImpEnv, ImpType, Loc};
use crate::measure::{FiniteMeasure, Posterior, Transformer, DEFAULT_SUPPORT_CAP};
use crate::typesys::{Type, TypeEnv};
use crate::value::State;
use crate::{Error, Result};

/// The result of `ρ ⊢ M ⇒ C, p`.
#[derive(Clone, Debug)]
pub struct Compiled {
    /// `C`, possibly with loops and array locations.
    pub body: Block,
    pub pattern: Pattern,
    pub layout: Layout,
    /// Input environment `Σ` described by the layout.
    pub sigma: ImpEnv,
    /// Type of every allocated location.
    pub types: BTreeMap<Loc, ImpType>,
    /// Fun type of the translated term.
    pub ty: Type,
}

/// Compile a closed, type-checked term under the empty layout.
pub fn compile(e: &Expr) -> Result<Compiled> {
    compile_open(e, &TypeEnv::new())
}

/// Compile a term typed under `Γ`; the layout for `Γ` takes the first locations.
pub fn compile_open(e: &Expr, gamma: &TypeEnv) -> Result<Compiled> {
    let ty = e.ty.clone().ok_or_else(|| Error::Internal("compile needs a type-checked term".into()))?;
    let mut tr = Translator::new();
    let (layout, sigma) = layout_for(&mut tr, gamma)?;
    let (body, pattern) = tr.translate(&layout, e)?;
    Ok(Compiled { body, pattern, layout, sigma, types: tr.types, ty })
}

/// Array locations replaced by their element scalars.
pub fn unrolled_env(env: &[(Loc, ImpType)]) -> ImpEnv {
    let mut out = Vec::new();
    for (l, t) in env {
        match t {
            ImpType::Base(_) => out.push((*l, *t)),
            ImpType::Array(b, r) => out.extend((0..r.size as u32).map(|i| (l.at(i), ImpType::Base(*b)))),
        }
    }
    out
}

impl Compiled {
    /// Core Imp: loops, arrays and subscripts unrolled.
    pub fn core(&self) -> Result<Block> {
        unroll_imp(&self.body, &self.types)
    }

    /// Static correctness: `Σ ⊢ C : Σ'` and `Σ, Σ' ⊢ p : t` on the unrolled program.
    pub fn check_static(&self) -> Result<ImpEnv> {
        let core = self.core()?;
        let sigma = unrolled_env(&self.sigma);
        let yields = typecheck_imp(&core, &sigma)?;
        let mut all = sigma;
        all.extend(yields.iter().copied());
        if !self.pattern.unrolled().has_type(&all, &self.ty.unrolled()) {
            return Err(Error::ImpType(format!("result pattern {} does not have type {}", self.pattern, self.ty)));
        }
        Ok(yields)
    }

    /// `pure (lift ρ) >>> impdt⟦C⟧ >>> pure (λs. (restrict ρ s, V⟦p⟧ s))`.
    pub fn transformer(&self) -> Result<FunTransformer> {
        let core = self.core()?;
        let (rho_in, rho_out, p) = (self.layout.clone(), self.layout.clone(), self.pattern.clone());
        Ok(Transformer::pure(move |s: &State| lift(&rho_in, s))
            .then(transform_imp(&core)?)
            .then(Transformer::pure(move |s: &State<Loc>| Ok((restrict(&rho_out, s), p.read(s))))))
    }

    pub fn to_json(&self) -> Json {
        json!({
            "imp": self.body,
            "pattern": self.pattern,
            "sigma": self.sigma.iter().map(|(l, t)| json!({"loc": l, "type": t})).collect::<Vec<_>>(),
        })
    }
}

/// Posterior of a closed program through the compiled Imp semantics.
pub fn infer_imp(e: &Expr) -> Result<Posterior> {
    infer_imp_capped(e, DEFAULT_SUPPORT_CAP)
}

pub fn infer_imp_capped(e: &Expr, cap: usize) -> Result<Posterior> {
    let c = compile(e)?;
    c.check_static()?;
    let mut start = FiniteMeasure::dirac(State::empty());
    start.set_cap(cap);
    let mu = c.transformer()?.apply(&start)?;
    Posterior::from_unnormalized(&mu.map(|(_, v)| Ok(v.clone()))?)
}
