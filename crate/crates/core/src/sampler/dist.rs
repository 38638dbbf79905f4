use rand::Rng;
use statrs::function::beta::ln_beta;
use statrs::function::gamma::ln_gamma;

use crate::ast::Dist;
use crate::measure::mass;
use crate::ops::{ParamError, Params};
use crate::value::CanonValue;

/// Mass (discrete) or density (continuous) of `x`; zero off the support.
pub fn density(d: Dist, params: &CanonValue, x: &CanonValue) -> Result<f64, ParamError> {
    let p = Params::decode(d, params)?;
    Ok(density_of(&p, x))
}

pub fn density_of(p: &Params, x: &CanonValue) -> f64 {
    let Some(r) = x.as_real() else { return mass(p, x) };
    match *p {
        Params::Gaussian { mean, variance } => {
            (-(r - mean) * (r - mean) / (2.0 * variance)).exp() / (2.0 * std::f64::consts::PI * variance).sqrt()
        }
        Params::Beta { a, b } => {
            if !(0.0..=1.0).contains(&r) {
                return 0.0;
            }
            let v = ((a - 1.0) * r.ln() + (b - 1.0) * (1.0 - r).ln() - ln_beta(a, b)).exp();
            if v.is_nan() {
                0.0
            } else {
                v
            }
        }
        Params::Gamma { shape, rate } => {
            if r <= 0.0 {
                return 0.0;
            }
            (shape * rate.ln() + (shape - 1.0) * r.ln() - rate * r - ln_gamma(shape)).exp()
        }
        _ => 0.0,
    }
}

pub fn sample<R: Rng + ?Sized>(d: Dist, params: &CanonValue, rng: &mut R) -> Result<CanonValue, ParamError> {
    Ok(sample_of(&Params::decode(d, params)?, rng))
}

pub fn sample_of<R: Rng + ?Sized>(p: &Params, rng: &mut R) -> CanonValue {
    use CanonValue::*;
    match *p {
        Params::Bernoulli { p } => Bool(rng.gen::<f64>() < p),
        Params::Binomial { n, p } => Int((0..n).filter(|_| rng.gen::<f64>() < p).count() as i64),
        Params::Poisson { rate } => Int(poisson(rate, rng)),
        Params::DiscreteUniform { m } => Int(((rng.gen::<f64>() * m as f64) as i64).min(m - 1)),
        Params::Gaussian { mean, variance } => Real(mean + variance.sqrt() * std_normal(rng)),
        Params::Beta { a, b } => {
            let x = gamma(a, rng);
            let y = gamma(b, rng);
            Real(x / (x + y))
        }
        Params::Gamma { shape, rate } => Real(gamma(shape, rng) / rate),
    }
}

/// Box–Muller, keeping one of the pair.
fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1 = 1.0 - rng.gen::<f64>();
    let u2 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Marsaglia–Tsang, unit rate.
fn gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape < 1.0 {
        let u = 1.0 - rng.gen::<f64>();
        return gamma(shape + 1.0, rng) * u.powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = std_normal(rng);
        let v = (1.0 + c * x).powi(3);
        if v <= 0.0 {
            continue;
        }
        let u = rng.gen::<f64>();
        if u < 1.0 - 0.0331 * x.powi(4) || u.ln() < 0.5 * x * x + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Knuth's product method for small rates, PTRS rejection otherwise.
fn poisson<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> i64 {
    if rate < 30.0 {
        let limit = (-rate).exp();
        let mut k = 0;
        let mut prod = rng.gen::<f64>();
        while prod > limit {
            k += 1;
            prod *= rng.gen::<f64>();
        }
        return k;
    }
    let slam = rate.sqrt();
    let loglam = rate.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.gen::<f64>() - 0.5;
        let v = rng.gen::<f64>();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + rate + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as i64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        if v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln() <= -rate + k * loglam - ln_gamma(k + 1.0) {
            return k as i64;
        }
    }
}
