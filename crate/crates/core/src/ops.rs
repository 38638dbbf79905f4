//! Evaluation of the primitive operators and distribution parameters.

use thiserror::Error;

use crate::ast::{BinOp, Dist};
use crate::value::CanonValue;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("operator `{op}` is not defined on {left} and {right}")]
    BadOperands { op: BinOp, left: String, right: String },
    #[error("integer overflow in `{0}`")]
    Overflow(BinOp),
    #[error("modulo by zero")]
    ModByZero,
}

/// `c1 ⊗ c2` on constants. Integer `%` truncates toward zero.
pub fn apply(op: BinOp, a: &CanonValue, b: &CanonValue) -> Result<CanonValue, EvalError> {
    use CanonValue::*;
    let bad = || EvalError::BadOperands { op, left: a.to_string(), right: b.to_string() };
    Ok(match (op, a, b) {
        (BinOp::And, Bool(x), Bool(y)) => Bool(*x && *y),
        (BinOp::Or, Bool(x), Bool(y)) => Bool(*x || *y),
        (BinOp::Eq, Bool(x), Bool(y)) => Bool(x == y),
        (BinOp::Eq, Int(x), Int(y)) => Bool(x == y),
        (BinOp::Gt, Int(x), Int(y)) => Bool(x > y),
        (BinOp::Gt, Real(x), Real(y)) => Bool(x > y),
        (BinOp::Add, Int(x), Int(y)) => Int(x.checked_add(*y).ok_or(EvalError::Overflow(op))?),
        (BinOp::Sub, Int(x), Int(y)) => Int(x.checked_sub(*y).ok_or(EvalError::Overflow(op))?),
        (BinOp::Mul, Int(x), Int(y)) => Int(x.checked_mul(*y).ok_or(EvalError::Overflow(op))?),
        (BinOp::Mod, Int(_), Int(0)) => return Err(EvalError::ModByZero),
        (BinOp::Mod, Int(x), Int(y)) => Int(x.checked_rem(*y).ok_or(EvalError::Overflow(op))?),
        (BinOp::Add, Real(x), Real(y)) => Real(x + y),
        (BinOp::Sub, Real(x), Real(y)) => Real(x - y),
        (BinOp::Mul, Real(x), Real(y)) => Real(x * y),
        _ => return Err(bad()),
    })
}

/// Decoded, validated distribution parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Params {
    Bernoulli { p: f64 },
    Binomial { n: i64, p: f64 },
    Poisson { rate: f64 },
    DiscreteUniform { m: i64 },
    Gaussian { mean: f64, variance: f64 },
    Beta { a: f64, b: f64 },
    /// Shape and rate: density `r^(s-1) e^(-p r) p^s / Γ(s)`.
    Gamma { shape: f64, rate: f64 },
}

#[derive(Debug, Clone, Error, PartialEq)]
#[error("invalid parameters for {dist}: {message}")]
pub struct ParamError {
    pub dist: Dist,
    pub message: String,
}

impl Params {
    pub fn decode(d: Dist, v: &CanonValue) -> Result<Params, ParamError> {
        let err = |m: String| ParamError { dist: d, message: m };
        let real = |x: &CanonValue| x.as_real().ok_or_else(|| err(format!("expected real, got {x}")));
        let int = |x: &CanonValue| x.as_int().ok_or_else(|| err(format!("expected int, got {x}")));
        let two = |v: &CanonValue| match v {
            CanonValue::Pair(a, b) => Ok(((**a).clone(), (**b).clone())),
            other => Err(err(format!("expected a pair of parameters, got {other}"))),
        };
        let prob = |p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(p)
            } else {
                Err(err(format!("probability {p} outside [0, 1]")))
            }
        };
        let positive = |x: f64, what: &str| {
            if x > 0.0 && x.is_finite() {
                Ok(x)
            } else {
                Err(err(format!("{what} must be positive and finite, got {x}")))
            }
        };
        Ok(match d {
            Dist::Bernoulli => Params::Bernoulli { p: prob(real(v)?)? },
            Dist::Binomial => {
                let (n, p) = two(v)?;
                let n = int(&n)?;
                if n < 0 {
                    return Err(err(format!("trial count {n} is negative")));
                }
                Params::Binomial { n, p: prob(real(&p)?)? }
            }
            Dist::Poisson => {
                let l = real(v)?;
                if !(l >= 0.0 && l.is_finite()) {
                    return Err(err(format!("rate must be non-negative and finite, got {l}")));
                }
                Params::Poisson { rate: l }
            }
            Dist::DiscreteUniform => {
                let m = int(v)?;
                if m < 1 {
                    return Err(err(format!("bound {m} must be at least 1")));
                }
                Params::DiscreteUniform { m }
            }
            Dist::Gaussian => {
                let (m, s) = two(v)?;
                let mean = real(&m)?;
                if !mean.is_finite() {
                    return Err(err(format!("mean must be finite, got {mean}")));
                }
                Params::Gaussian { mean, variance: positive(real(&s)?, "variance")? }
            }
            Dist::Beta => {
                let (a, b) = two(v)?;
                Params::Beta { a: positive(real(&a)?, "a")?, b: positive(real(&b)?, "b")? }
            }
            Dist::Gamma => {
                let (s, p) = two(v)?;
                Params::Gamma { shape: positive(real(&s)?, "shape")?, rate: positive(real(&p)?, "rate")? }
            }
        })
    }
}
