//! Finite discrete measures and the measure-transformer combinators.

mod dist;
mod finite;
pub mod sum;
mod transformer;

pub use dist::{dist_measure, mass, POISSON_TAIL};
pub use finite::{FiniteMeasure, DEFAULT_SUPPORT_CAP};
pub use transformer::{Key, Transformer, KERNEL_MASS_SLACK};

use crate::value::CanonValue;

/// A normalized distribution over result values together with the evidence.
#[derive(Clone, Debug, PartialEq)]
pub struct Posterior {
    pub dist: FiniteMeasure<CanonValue>,
    pub evidence: f64,
}

impl Posterior {
    /// Normalize an unnormalized result measure; zero mass is `ZeroEvidence`.
    pub fn from_unnormalized(mu: &FiniteMeasure<CanonValue>) -> crate::Result<Posterior> {
        let (dist, evidence) = mu.normalize()?;
        Ok(Posterior { dist, evidence })
    }

    pub fn prob(&self, v: &CanonValue) -> f64 {
        self.dist.weight(v)
    }
}
