//! Likelihood-weighted Monte Carlo for discrete, continuous and hybrid programs.

mod dist;
mod grid;
mod observe;
mod run;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use dist::{density, density_of, sample, sample_of};
pub use grid::{cond_density_oracle, GridMeasure, Projection};
pub use observe::{observe_rewrite, Annotated, ObsAnnotation, ObsClass};
pub use run::{Sampler, WeightedSample};

use crate::ast::Expr;
use crate::measure::sum::Neumaier;
use crate::value::CanonValue;
use crate::{Error, Result};

pub const DEFAULT_CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    /// Runs per RNG stream; chunk `i` uses stream `i` of the seeded generator.
    pub chunk: usize,
}

impl McConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        McConfig { samples, seed, chunk: DEFAULT_CHUNK }
    }
}

/// A self-normalized estimate with its delta-method standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

/// Per-component summary of the returned value.
#[derive(Clone, Debug, Serialize)]
pub struct ComponentStats {
    /// Projection path, e.g. `"2.1"`; empty for a scalar result.
    pub path: String,
    pub mean: Estimate,
    pub variance: Estimate,
    /// `P(true)` for boolean components.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_true: Option<Estimate>,
}

#[derive(Clone, Debug)]
pub struct McResult {
    pub samples: usize,
    pub seed: u64,
    pub values: Vec<CanonValue>,
    pub weights: Vec<f64>,
    sum_w: f64,
    pub evidence: Estimate,
    pub ess: f64,
}

/// Likelihood weighting over `cfg.samples` runs; deterministic in `(seed, samples, chunk)`.
pub fn infer_mc(e: &Expr, cfg: McConfig) -> Result<McResult> {
    if cfg.samples == 0 || cfg.chunk == 0 {
        return Err(Error::Budget("sample count and chunk size must be positive".into()));
    }
    let sampler = Sampler::new(e)?;
    let chunks = cfg.samples.div_ceil(cfg.chunk);
    let parts: Vec<Result<Vec<WeightedSample>>> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let n = cfg.chunk.min(cfg.samples - i * cfg.chunk);
            (0..n).map(|_| sampler.run(&mut rng)).collect()
        })
        .collect();
    let mut values = Vec::with_capacity(cfg.samples);
    let mut weights = Vec::with_capacity(cfg.samples);
    for part in parts {
        for s in part? {
            values.push(s.value);
            weights.push(s.weight);
        }
    }
    McResult::new(values, weights, cfg.seed)
}

impl McResult {
    pub fn new(values: Vec<CanonValue>, weights: Vec<f64>, seed: u64) -> Result<McResult> {
        let n = weights.len();
        let sum_w: f64 = weights.iter().copied().collect::<Neumaier>().value();
        if sum_w <= 0.0 || !sum_w.is_finite() {
            return Err(Error::ZeroEvidence);
        }
        let sum_w2: f64 = weights.iter().map(|w| w * w).collect::<Neumaier>().value();
        let mean = sum_w / n as f64;
        let var: f64 = weights.iter().map(|w| (w - mean) * (w - mean)).collect::<Neumaier>().value() / n as f64;
        Ok(McResult {
            samples: n,
            seed,
            values,
            weights,
            sum_w,
            evidence: Estimate { value: mean, se: (var / n as f64).sqrt() },
            ess: sum_w * sum_w / sum_w2,
        })
    }

    /// Posterior expectation of `f`.
    pub fn estimate(&self, f: impl Fn(&CanonValue) -> f64) -> Estimate {
        let fs: Vec<f64> = self.values.iter().map(f).collect();
        self.weighted(&fs)
    }

    fn weighted(&self, fs: &[f64]) -> Estimate {
        let m = fs.iter().zip(&self.weights).map(|(f, w)| f * w).collect::<Neumaier>().value() / self.sum_w;
        let v: f64 = fs.iter().zip(&self.weights).map(|(f, w)| w * w * (f - m) * (f - m)).collect::<Neumaier>().value();
        Estimate { value: m, se: v.sqrt() / self.sum_w }
    }

    /// Posterior variance of `f`.
    pub fn variance(&self, f: impl Fn(&CanonValue) -> f64) -> Estimate {
        let fs: Vec<f64> = self.values.iter().map(f).collect();
        let m = self.weighted(&fs).value;
        let sq: Vec<f64> = fs.iter().map(|f| (f - m) * (f - m)).collect();
        self.weighted(&sq)
    }

    pub fn prob(&self, pred: impl Fn(&CanonValue) -> bool) -> Estimate {
        self.estimate(|v| pred(v) as u8 as f64)
    }

    pub fn components(&self) -> Vec<ComponentStats> {
        let Some(first) = self.values.first() else { return Vec::new() };
        let paths: Vec<(String, bool)> =
            first.leaves().into_iter().map(|(p, v)| (p, matches!(v, CanonValue::Bool(_)))).collect();
        paths
            .into_iter()
            .enumerate()
            .map(|(i, (path, is_bool))| {
                let leaf = move |v: &CanonValue| scalar(v.leaves().get(i).map(|l| l.1));
                ComponentStats {
                    mean: self.estimate(leaf),
                    variance: self.variance(leaf),
                    p_true: is_bool.then(|| self.estimate(leaf)),
                    path,
                }
            })
            .collect()
    }

    /// Estimated posterior probability of every distinct result, for results
    /// without real components.
    pub fn table(&self) -> Option<BTreeMap<CanonValue, Estimate>> {
        let has_real = self.values.iter().any(|v| v.leaves().iter().any(|l| matches!(l.1, CanonValue::Real(_))));
        if has_real {
            return None;
        }
        let keys: std::collections::BTreeSet<&CanonValue> = self.values.iter().collect();
        Some(keys.into_iter().map(|k| (k.clone(), self.prob(|v| v == k))).collect())
    }
}

fn scalar(v: Option<&CanonValue>) -> f64 {
    match v {
        Some(CanonValue::Bool(b)) => *b as u8 as f64,
        Some(CanonValue::Int(i)) => *i as f64,
        Some(CanonValue::Real(r)) => *r,
        _ => 0.0,
    }
}
