use std::collections::BTreeMap;

use serde_json::{json, Value as Json};

use crate::measure::sum::Neumaier;
use crate::{Error, Result};

pub const DEFAULT_SUPPORT_CAP: usize = 1_000_000;

/// A finite discrete measure: strictly positive weights on a sorted support.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMeasure<K: Ord = crate::value::CanonValue> {
    support: BTreeMap<K, f64>,
    cap: usize,
}

impl<K: Ord + Clone> FiniteMeasure<K> {
    pub fn zero() -> Self {
        Self::with_cap(DEFAULT_SUPPORT_CAP)
    }

    pub fn with_cap(cap: usize) -> Self {
        FiniteMeasure { support: BTreeMap::new(), cap }
    }

    /// An empty measure sharing this one's support cap.
    pub fn empty_like<L: Ord + Clone>(&self) -> FiniteMeasure<L> {
        FiniteMeasure::with_cap(self.cap)
    }

    pub fn dirac(k: K) -> Self {
        let mut m = Self::zero();
        m.support.insert(k, 1.0);
        m
    }

    pub fn from_weights(items: impl IntoIterator<Item = (K, f64)>) -> Result<Self> {
        let mut m = Self::zero();
        for (k, w) in items {
            m.add_mass(k, w)?;
        }
        Ok(m)
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn set_cap(&mut self, cap: usize) {
        self.cap = cap;
    }

    /// Add `w` at `k`. Zero weights are dropped.
    pub fn add_mass(&mut self, k: K, w: f64) -> Result<()> {
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::Internal(format!("invalid measure weight {w}")));
        }
        if w == 0.0 {
            return Ok(());
        }
        if let Some(x) = self.support.get_mut(&k) {
            *x += w;
            return Ok(());
        }
        if self.support.len() >= self.cap {
            return Err(Error::SupportOverflow { cap: self.cap });
        }
        self.support.insert(k, w);
        Ok(())
    }

    pub fn weight(&self, k: &K) -> f64 {
        self.support.get(k).copied().unwrap_or(0.0)
    }

    /// `|μ|`, summed with compensation.
    pub fn total(&self) -> f64 {
        self.support.values().copied().collect::<Neumaier>().value()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, f64)> {
        self.support.iter().map(|(k, w)| (k, *w))
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> {
        self.support.keys()
    }

    /// `μ|_B`.
    pub fn restrict(&self, mut keep: impl FnMut(&K) -> bool) -> Self {
        let support = self.support.iter().filter(|(k, _)| keep(k)).map(|(k, w)| (k.clone(), *w)).collect();
        FiniteMeasure { support, cap: self.cap }
    }

    /// `μ1 + μ2`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for (k, w) in other.iter() {
            out.add_mass(k.clone(), w)?;
        }
        Ok(out)
    }

    pub fn scale(&self, r: f64) -> Result<Self> {
        let mut out = self.empty_like();
        for (k, w) in self.iter() {
            out.add_mass(k.clone(), r * w)?;
        }
        Ok(out)
    }

    /// The probability measure `μ / |μ|` and the evidence `|μ|`.
    pub fn normalize(&self) -> Result<(Self, f64)> {
        let z = self.total();
        if z == 0.0 {
            return Err(Error::ZeroEvidence);
        }
        let support = self.support.iter().map(|(k, w)| (k.clone(), w / z)).collect();
        Ok((FiniteMeasure { support, cap: self.cap }, z))
    }

    /// Push-forward along `f`, summing weights that collide.
    pub fn map<L: Ord + Clone>(&self, mut f: impl FnMut(&K) -> Result<L>) -> Result<FiniteMeasure<L>> {
        let mut out = self.empty_like();
        for (k, w) in self.iter() {
            out.add_mass(f(k)?, w)?;
        }
        Ok(out)
    }

    /// Largest pointwise weight difference over the union of supports.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let a = self.iter().map(|(k, w)| (w - other.weight(k)).abs());
        let b = other.iter().filter(|(k, _)| !self.support.contains_key(k)).map(|(_, w)| w);
        a.chain(b).fold(0.0, f64::max)
    }

    /// Pointwise agreement within `tol` relative to the larger weight, or `tol` absolute.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0);
        self.iter().all(|(k, w)| close(w, other.weight(k))) && other.iter().all(|(k, w)| close(w, self.weight(k)))
    }

    /// `[{value, weight}]` in support order.
    pub fn to_json(&self, key: impl Fn(&K) -> Json) -> Json {
        Json::Array(self.iter().map(|(k, w)| json!({"value": key(k), "weight": w})).collect())
    }
}

impl<K: Ord + Clone> Default for FiniteMeasure<K> {
    fn default() -> Self {
        Self::zero()
    }
}
