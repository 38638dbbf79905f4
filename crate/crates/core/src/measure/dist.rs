use statrs::function::factorial::{binomial, ln_binomial, ln_factorial};

use crate::ast::{Dist, Span};
use crate::measure::FiniteMeasure;
use crate::ops::Params;
use crate::value::CanonValue;
use crate::{Error, Result};

/// Poisson supports are cut where the remaining tail is below this.
pub const POISSON_TAIL: f64 = 1e-12;

/// Mass of `x` under a discrete distribution; zero off the support.
pub fn mass(params: &Params, x: &CanonValue) -> f64 {
    match (params, x) {
        (Params::Bernoulli { p }, CanonValue::Bool(b)) => {
            if *b {
                *p
            } else {
                1.0 - p
            }
        }
        (Params::Binomial { n, p }, CanonValue::Int(i)) => binomial_pmf(*n, *p, *i),
        (Params::Poisson { rate }, CanonValue::Int(k)) => poisson_pmf(*rate, *k),
        (Params::DiscreteUniform { m }, CanonValue::Int(i)) if (0..*m).contains(i) => 1.0 / *m as f64,
        _ => 0.0,
    }
}

fn binomial_pmf(n: i64, p: f64, i: i64) -> f64 {
    if i < 0 || i > n {
        return 0.0;
    }
    let (n, i) = (n as u64, i as u64);
    if n <= 1000 || p == 0.0 || p == 1.0 {
        binomial(n, i) * p.powi(i as i32) * (1.0 - p).powi((n - i) as i32)
    } else {
        (ln_binomial(n, i) + i as f64 * p.ln() + (n - i) as f64 * (1.0 - p).ln()).exp()
    }
}

fn poisson_pmf(rate: f64, k: i64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    if rate == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * rate.ln() - rate - ln_factorial(k as u64)).exp()
}

/// The measure `μ_D(params)` of a discrete distribution.
pub fn dist_measure(d: Dist, params: &CanonValue) -> Result<FiniteMeasure> {
    if d.is_continuous() {
        return Err(Error::ContinuousRandom { dist: d.name(), span: Span::default() });
    }
    let ps = Params::decode(d, params)?;
    let mut mu = FiniteMeasure::zero();
    match ps {
        Params::Bernoulli { .. } => {
            for b in [true, false] {
                let v = CanonValue::Bool(b);
                mu.add_mass(v.clone(), mass(&ps, &v))?;
            }
        }
        Params::Binomial { n, .. } => {
            for i in 0..=n {
                mu.add_mass(CanonValue::Int(i), mass(&ps, &CanonValue::Int(i)))?;
            }
        }
        Params::DiscreteUniform { m } => {
            for i in 0..m {
                mu.add_mass(CanonValue::Int(i), 1.0 / m as f64)?;
            }
        }
        Params::Poisson { rate } => {
            let mut k = 0i64;
            loop {
                mu.add_mass(CanonValue::Int(k), poisson_pmf(rate, k))?;
                let n2 = (k + 2) as f64;
                if n2 > rate && poisson_pmf(rate, k + 1) / (1.0 - rate / n2) < POISSON_TAIL {
                    break;
                }
                k += 1;
            }
        }
        _ => unreachable!("continuous distributions are rejected above"),
    }
    Ok(mu)
}
