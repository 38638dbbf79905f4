//! Exhaustive enumeration of runs under the small-step reduction relation.
//!
//! Reduction happens under evaluation contexts `R ::= [] | let x = R in M`.
//! Every discrete draw branches over its support; a path that observes a
//! non-zero value is invalid and contributes only to the invalid mass.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;

use crate::ast::{Expr, ExprKind, Side, Value};
use crate::measure::sum::Neumaier;
use crate::measure::{dist_measure, FiniteMeasure, Posterior, DEFAULT_SUPPORT_CAP};
use crate::ops::apply;
use crate::typesys::{typecheck, BaseType, Type, TypeEnv};
use crate::value::CanonValue;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct EnumConfig {
    /// Most branching draws allowed on one path; total paths are capped at `2^max_choices`.
    pub max_choices: u32,
    pub parallel: bool,
    /// Keep every run, including invalid ones, instead of only the value totals.
    pub trace: bool,
    /// Re-typecheck every intermediate term against the program type.
    pub check_preservation: bool,
    /// Largest number of distinct result values.
    pub max_support: usize,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig { max_choices: 24, parallel: true, trace: false, check_preservation: false, max_support: DEFAULT_SUPPORT_CAP }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Run {
    pub value: CanonValue,
    pub prob: f64,
    pub valid: bool,
    pub steps: usize,
}

#[derive(Clone, Debug)]
pub struct Enumeration {
    /// Mass of valid runs, by final value.
    pub valid: FiniteMeasure,
    /// Total probability of invalid runs.
    pub invalid_mass: f64,
    pub runs_explored: u64,
    /// All runs in depth-first order, when tracing.
    pub runs: Option<Vec<Run>>,
}

impl Enumeration {
    pub fn evidence(&self) -> f64 {
        self.valid.total()
    }

    pub fn posterior(&self) -> Result<Posterior> {
        Posterior::from_unnormalized(&self.valid)
    }
}

/// One reduction step: successors with their probabilities, and for an
/// `observe` redex whether the observation held.
struct Step {
    next: Vec<(f64, Expr)>,
    observed: Option<bool>,
}

fn closed(v: &Value) -> Result<CanonValue> {
    v.to_canon().ok_or_else(|| Error::Internal(format!("stuck on open value {v}")))
}

fn step(e: &Expr) -> Result<Step> {
    let single = |k: ExprKind| Step { next: vec![(1.0, Expr { kind: k, span: e.span, ty: e.ty.clone() })], observed: None };
    let value = |c: CanonValue| single(ExprKind::Value(Value::from_canon(&c)));
    Ok(match &e.kind {
        ExprKind::Value(_) => Step { next: Vec::new(), observed: None },
        ExprKind::Op(op, a, b) => value(apply(*op, &closed(a)?, &closed(b)?)?),
        ExprKind::Proj(side, v) => match (side, closed(v)?) {
            (Side::Fst, CanonValue::Pair(a, _)) => value(*a),
            (Side::Snd, CanonValue::Pair(_, b)) => value(*b),
            (_, c) => return Err(Error::Internal(format!("stuck: projection of non-pair {c}"))),
        },
        ExprKind::If(c, m, n) => match closed(c)? {
            CanonValue::Bool(true) => Step { next: vec![(1.0, (**m).clone())], observed: None },
            CanonValue::Bool(false) => Step { next: vec![(1.0, (**n).clone())], observed: None },
            c => return Err(Error::Internal(format!("stuck: if on non-boolean {c}"))),
        },
        ExprKind::Let(x, m, n) => match m.as_value() {
            Some(v) => Step { next: vec![(1.0, n.subst(x, v))], observed: None },
            None => {
                let inner = step(m)?;
                let next = inner
                    .next
                    .into_iter()
                    .map(|(p, m2)| {
                        let k = ExprKind::Let(x.clone(), Box::new(m2), n.clone());
                        (p, Expr { kind: k, span: e.span, ty: e.ty.clone() })
                    })
                    .collect();
                Step { next, observed: inner.observed }
            }
        },
        ExprKind::Random(d, v) => {
            let mu = dist_measure(*d, &closed(v)?).map_err(|err| err.at(e.span))?;
            let next = mu.iter().map(|(c, p)| (p, Expr { kind: ExprKind::Value(Value::from_canon(c)), span: e.span, ty: e.ty.clone() })).collect();
            Step { next, observed: None }
        }
        ExprKind::Observe(v, b) => {
            let c = closed(v)?;
            if *b == Some(BaseType::Real) || matches!(c, CanonValue::Real(_)) {
                return Err(Error::ContinuousObserve { span: e.span });
            }
            let mut s = value(CanonValue::Unit);
            s.observed = Some(c.is_zero());
            s
        }
        ExprKind::Array(_) | ExprKind::Index(..) | ExprKind::For(..) => {
            return Err(Error::Internal("arrays must be unrolled before enumeration".into()))
        }
    })
}

/// The reduction relation `M →^p M'`; empty exactly when `M` is a value.
pub fn reduce(e: &Expr) -> Result<Vec<(f64, Expr)>> {
    Ok(step(e)?.next)
}

#[derive(Default)]
struct Acc {
    valid: BTreeMap<CanonValue, Neumaier>,
    invalid: Neumaier,
    runs: u64,
    trace: Vec<Run>,
}

impl Acc {
    fn merge(&mut self, other: Acc) {
        for (k, s) in other.valid {
            self.valid.entry(k).or_default().merge(&s);
        }
        self.invalid.merge(&other.invalid);
        self.runs += other.runs;
        self.trace.extend(other.trace);
    }
}

struct Walker<'a> {
    cfg: &'a EnumConfig,
    ty: Option<Type>,
    leaves: AtomicU64,
    max_leaves: u64,
}

// Subtrees below this many branching draws are explored on the current thread.
const PARALLEL_DEPTH: u32 = 12;

impl Walker<'_> {
    fn leaf(&self, acc: &mut Acc, value: CanonValue, prob: f64, valid: bool, steps: usize) -> Result<()> {
        if self.leaves.fetch_add(1, Ordering::Relaxed) >= self.max_leaves {
            return Err(Error::Budget(format!("more than {} runs", self.max_leaves)));
        }
        acc.runs += 1;
        if valid {
            acc.valid.entry(value.clone()).or_default().add(prob);
        } else {
            acc.invalid.add(prob);
        }
        if self.cfg.trace {
            acc.trace.push(Run { value, prob, valid, steps });
        }
        Ok(())
    }

    fn walk(&self, mut e: Expr, mut prob: f64, mut valid: bool, mut steps: usize, choices: u32) -> Result<Acc> {
        let mut acc = Acc::default();
        loop {
            if let Some(ty) = &self.ty {
                let mut copy = e.clone();
                let t = typecheck(&mut copy, &TypeEnv::new())?;
                if &t != ty {
                    return Err(Error::Internal(format!("preservation violated: {t} is not {ty}")));
                }
            }
            let s = step(&e)?;
            if let Some(ok) = s.observed {
                valid &= ok;
            }
            let mut next = s.next;
            match next.len() {
                0 => {
                    let v = closed(e.as_value().expect("only values have no successor"))?;
                    self.leaf(&mut acc, v, prob, valid, steps)?;
                    return Ok(acc);
                }
                _ if !valid && !self.cfg.trace => {
                    self.leaf(&mut acc, CanonValue::Unit, prob, false, steps)?;
                    return Ok(acc);
                }
                1 => {
                    let (p, e2) = next.pop().expect("one successor");
                    prob *= p;
                    e = e2;
                    steps += 1;
                }
                _ => {
                    if choices + 1 > self.cfg.max_choices {
                        return Err(Error::Budget(format!("a run makes more than {} random choices", self.cfg.max_choices)));
                    }
                    return self.branch(next, prob, valid, steps + 1, choices + 1);
                }
            }
        }
    }

    fn branch(&self, mut next: Vec<(f64, Expr)>, prob: f64, valid: bool, steps: usize, choices: u32) -> Result<Acc> {
        if next.len() == 1 {
            let (p, e) = next.pop().expect("one successor");
            return self.walk(e, prob * p, valid, steps, choices);
        }
        if self.cfg.parallel && choices <= PARALLEL_DEPTH {
            let right = next.split_off(next.len() / 2);
            let (a, b) = rayon::join(|| self.branch(next, prob, valid, steps, choices), || self.branch(right, prob, valid, steps, choices));
            let mut a = a?;
            a.merge(b?);
            return Ok(a);
        }
        let mut acc = Acc::default();
        for (p, e) in next {
            acc.merge(self.walk(e, prob * p, valid, steps, choices)?);
        }
        Ok(acc)
    }
}

/// Enumerate every run of a closed, array-free program.
pub fn enumerate_runs(e: &Expr, cfg: &EnumConfig) -> Result<Enumeration> {
    let ty = if cfg.check_preservation {
        let mut copy = e.clone();
        Some(typecheck(&mut copy, &TypeEnv::new())?)
    } else {
        None
    };
    let walker = Walker {
        cfg,
        ty,
        leaves: AtomicU64::new(0),
        max_leaves: 1u64.checked_shl(cfg.max_choices).unwrap_or(u64::MAX),
    };
    let acc = walker.walk(e.clone(), 1.0, true, 0, 0)?;
    let mut valid = FiniteMeasure::with_cap(cfg.max_support);
    for (k, s) in acc.valid {
        valid.add_mass(k, s.value())?;
    }
    Ok(Enumeration {
        valid,
        invalid_mass: acc.invalid.value(),
        runs_explored: acc.runs,
        runs: cfg.trace.then_some(acc.trace),
    })
}

/// `Prob[value = V | valid]` for every `V`, with the evidence `Prob[valid]`.
pub fn posterior(e: &Expr, cfg: &EnumConfig) -> Result<Posterior> {
    enumerate_runs(e, cfg)?.posterior()
}
