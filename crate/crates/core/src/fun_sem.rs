//! Measure-transformer semantics of Fun over measures on variable states.

use crate::ast::{Expr, ExprKind, Name, Side, Value};
use crate::measure::{dist_measure, FiniteMeasure, Posterior, Transformer, DEFAULT_SUPPORT_CAP};
use crate::ops::apply;
use crate::typesys::BaseType;
use crate::value::{CanonValue, State};
use crate::{Error, Result};

/// `A⟦M⟧ : S_Γ ⤳ S_Γ × t`.
pub type FunTransformer = Transformer<State, (State, CanonValue)>;

/// `V⟦V⟧ s`.
pub fn eval_value(v: &Value, s: &State) -> CanonValue {
    match v {
        Value::Var(x) => s.lookup(x),
        Value::Const(c) => c.clone(),
        Value::Pair(a, b) => CanonValue::pair(eval_value(a, s), eval_value(b, s)),
    }
}

fn with_value(f: impl Fn(&State) -> Result<CanonValue> + Send + Sync + 'static) -> FunTransformer {
    Transformer::pure(move |s: &State| Ok((s.clone(), f(s)?)))
}

/// Assemble `A⟦M⟧`. `M` must be typed, array-free and have fresh binders.
pub fn transform(e: &Expr) -> Result<FunTransformer> {
    if !e.binders_are_fresh() {
        return Err(Error::Internal("bound variables must be distinct from each other and from free variables".into()));
    }
    build(e)
}

fn build(e: &Expr) -> Result<FunTransformer> {
    let span = e.span;
    Ok(match &e.kind {
        ExprKind::Value(v) => {
            let v = v.clone();
            with_value(move |s| Ok(eval_value(&v, s)))
        }
        ExprKind::Op(op, a, b) => {
            let (op, a, b) = (*op, a.clone(), b.clone());
            with_value(move |s| Ok(apply(op, &eval_value(&a, s), &eval_value(&b, s))?))
        }
        ExprKind::Proj(side, v) => {
            let (side, v) = (*side, v.clone());
            with_value(move |s| {
                let c = eval_value(&v, s);
                let part = match side {
                    Side::Fst => c.fst(),
                    Side::Snd => c.snd(),
                };
                part.cloned().ok_or_else(|| Error::Internal(format!("projection of non-pair {c}")))
            })
        }
        ExprKind::If(c, m, n) => {
            let c = c.clone();
            let test = move |s: &State| match eval_value(&c, s) {
                CanonValue::Bool(b) => Ok(b),
                other => Err(Error::Internal(format!("if on non-boolean {other}"))),
            };
            Transformer::choose(test, build(m)?, build(n)?)
        }
        ExprKind::Random(d, v) => {
            let (d, v) = (*d, v.clone());
            Transformer::extend(move |s: &State| dist_measure(d, &eval_value(&v, s)).map_err(|err| err.at(span)))
        }
        ExprKind::Observe(v, b) => {
            let base = b.ok_or_else(|| Error::Internal("observe reached the semantics untyped".into()))?;
            let v = v.clone();
            Transformer::constrain(base, span, move |s: &State| Ok(eval_value(&v, s)))
                .then(with_value(|_| Ok(CanonValue::Unit)))
        }
        ExprKind::Let(x, m, n) => {
            let x: Name = x.clone();
            let bind = x.clone();
            build(m)?
                .then(Transformer::pure(move |(s, c): &(State, CanonValue)| Ok(s.add(bind.clone(), c.clone()))))
                .then(build(n)?)
                .then(Transformer::pure(move |(s, c): &(State, CanonValue)| Ok((s.drop_keys([&x]), c.clone()))))
        }
        ExprKind::Array(_) | ExprKind::Index(..) | ExprKind::For(..) => {
            return Err(Error::Internal("arrays must be unrolled before the measure semantics".into()))
        }
    })
}

/// `A⟦M⟧ δ_∅` projected onto result values, unnormalized.
pub fn value_measure(e: &Expr) -> Result<FiniteMeasure> {
    value_measure_capped(e, DEFAULT_SUPPORT_CAP)
}

/// As [`value_measure`], failing once any intermediate support exceeds `cap`.
pub fn value_measure_capped(e: &Expr, cap: usize) -> Result<FiniteMeasure> {
    let mut start = FiniteMeasure::dirac(State::empty());
    start.set_cap(cap);
    let mu = transform(e)?.apply(&start)?;
    mu.map(|(_, c)| Ok(c.clone()))
}

/// Posterior and evidence of a closed program.
pub fn infer_mt(e: &Expr) -> Result<Posterior> {
    Posterior::from_unnormalized(&value_measure(e)?)
}

/// Whether any observation in `e` is at real type.
pub fn observes_real(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Observe(_, b) => *b == Some(BaseType::Real),
        ExprKind::If(_, m, n) | ExprKind::Let(_, m, n) => observes_real(m) || observes_real(n),
        _ => false,
    }
}
