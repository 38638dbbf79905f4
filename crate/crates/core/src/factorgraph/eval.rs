use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::factorgraph::graph::{Edge, Graph, Var};
use crate::imp::ImpState;
use crate::measure::sum::Neumaier;
use crate::measure::{dist_measure, FiniteMeasure};
use crate::ops::apply;
use crate::typesys::BaseType;
use crate::value::CanonValue;
use crate::{Error, Result};

type Weighted = Vec<(ImpState, f64)>;

/// `Pqq⟦G⟧ μ` with `λ` the counting measure. Top-level bound variables are
/// summed out; free variables missing from an ambient state are added.
pub fn graph_measure(g: &Graph, mu: &FiniteMeasure<ImpState>) -> Result<FiniteMeasure<ImpState>> {
    let items: Vec<(&ImpState, f64)> = mu.iter().collect();
    let parts: Vec<Result<Weighted>> = items
        .par_iter()
        .map(|(s, w)| {
            let exts = eval(g, s)?.ok_or_else(|| undetermined(g, s))?;
            Ok(exts.into_iter().map(|(t, v)| (t, v * w)).collect())
        })
        .collect();
    let mut acc: BTreeMap<ImpState, Neumaier> = BTreeMap::new();
    for part in parts {
        for (s, w) in part? {
            acc.entry(s).or_default().add(w);
        }
    }
    let mut out = FiniteMeasure::with_cap(mu.cap());
    for (s, w) in acc {
        out.add_mass(s, w.value())?;
    }
    Ok(out)
}

fn undetermined(g: &Graph, s: &ImpState) -> Error {
    let stuck: Vec<String> = g.free_vars().iter().filter(|v| !s.contains(v)).map(|v| v.to_string()).collect();
    Error::ContinuousGraph(format!("no edge determines the variables {}", stuck.join(", ")))
}

/// `p⟦G⟧` as a list of extensions of `s` with their weights; bound variables
/// of `g` are summed out. `None` when an input of `g` is not yet assigned.
fn eval(g: &Graph, s: &ImpState) -> Result<Option<Weighted>> {
    let pending: Vec<usize> = (0..g.edges.len()).collect();
    let mut raw = Vec::new();
    if !run(&g.edges, pending, s.clone(), 1.0, &mut raw)? {
        return Ok(None);
    }
    let bound: Vec<(Var, BaseType)> = g.bound.iter().filter(|(v, _)| !s.contains(v)).copied().collect();
    let free: Vec<Var> = g.free_vars().into_iter().filter(|v| !s.contains(v)).collect();
    let mut acc: BTreeMap<ImpState, Neumaier> = BTreeMap::new();
    for (t, w) in raw {
        // A bound variable no edge mentions on this path contributes its
        // counting measure: both booleans, or a divergent sum otherwise.
        let mut copies = 1.0;
        for (v, b) in &bound {
            if !t.contains(v) {
                copies *= unconstrained(*v, *b)?;
            }
        }
        let keys: Vec<Var> = bound.iter().map(|(v, _)| *v).collect();
        let o = t.drop_keys(&keys);
        if let Some(v) = free.iter().find(|v| !o.contains(v)) {
            return Err(Error::ContinuousGraph(format!("variable {v} is not determined by any edge")));
        }
        acc.entry(o).or_default().add(w * copies);
    }
    Ok(Some(acc.into_iter().map(|(s, w)| (s, w.value())).collect()))
}

fn unconstrained(v: Var, b: BaseType) -> Result<f64> {
    match b {
        BaseType::Bool => Ok(2.0),
        _ => Err(Error::ContinuousGraph(format!("variable {v} of type {b} is not determined by any edge"))),
    }
}

fn indicator(a: &CanonValue, b: &CanonValue) -> Result<f64> {
    if matches!(a, CanonValue::Real(_)) || matches!(b, CanonValue::Real(_)) {
        return Err(Error::ContinuousGraph(format!("equality constraint {a} = {b} between reals has no discrete factor")));
    }
    Ok(if a == b { 1.0 } else { 0.0 })
}

enum Step {
    /// Assign `var` with the given value, weight 1.
    Define(Var, CanonValue),
    Factor(f64),
    Branch(Var, FiniteMeasure),
    Extend(Weighted),
}

fn ready(e: &Edge, s: &ImpState) -> Result<Option<Step>> {
    let get = |v: &Var| s.get(v);
    Ok(Some(match e {
        Edge::Const { x, value } => match get(x) {
            Some(c) => Step::Factor(indicator(c, value)?),
            None => Step::Define(*x, value.clone()),
        },
        Edge::Equal { x, y } => match (get(x), get(y)) {
            (Some(a), Some(b)) => Step::Factor(indicator(a, b)?),
            (None, Some(b)) => Step::Define(*x, b.clone()),
            (Some(a), None) => Step::Define(*y, a.clone()),
            (None, None) => return Ok(None),
        },
        Edge::Op { x, op, y, z } => {
            let (Some(a), Some(b)) = (get(y), get(z)) else { return Ok(None) };
            let r = apply(*op, a, b)?;
            match get(x) {
                Some(c) => Step::Factor(indicator(c, &r)?),
                None => Step::Define(*x, r),
            }
        }
        Edge::Sample { x, dist, args } => {
            if dist.is_continuous() {
                return Err(Error::ContinuousGraph(format!("{dist} has a density, not a mass")));
            }
            let mut params = Vec::new();
            for a in args {
                let Some(v) = get(a) else { return Ok(None) };
                params.push(v.clone());
            }
            let m = dist_measure(*dist, &CanonValue::tuple(params))?;
            match get(x) {
                Some(c) => Step::Factor(m.weight(c)),
                None => Step::Branch(*x, m),
            }
        }
        Edge::Gate { cond, then, r#else } => {
            let Some(c) = get(cond) else { return Ok(None) };
            let c = c.as_bool().ok_or_else(|| Error::Internal(format!("gate condition {cond} is not a boolean")))?;
            // The untaken branch has exponent zero and is never evaluated.
            match eval(if c { then } else { r#else }, s)? {
                Some(exts) => Step::Extend(exts),
                None => return Ok(None),
            }
        }
    }))
}

/// Depth-first over the ready edges; `false` if the remaining edges are stuck.
fn run(edges: &[Edge], mut pending: Vec<usize>, s: ImpState, w: f64, out: &mut Weighted) -> Result<bool> {
    let mut s = s;
    let mut w = w;
    loop {
        if w == 0.0 {
            return Ok(true);
        }
        if pending.is_empty() {
            out.push((s, w));
            return Ok(true);
        }
        let mut found = None;
        for (k, &i) in pending.iter().enumerate() {
            if let Some(step) = ready(&edges[i], &s)? {
                found = Some((k, step));
                break;
            }
        }
        let Some((k, step)) = found else { return Ok(false) };
        pending.remove(k);
        match step {
            Step::Define(x, v) => s.insert(x, v),
            Step::Factor(f) => w *= f,
            Step::Branch(x, m) => {
                for (v, p) in m.iter() {
                    if !run(edges, pending.clone(), s.add(x, v.clone()), w * p, out)? {
                        return Ok(false);
                    }
                }
                return Ok(true);
            }
            Step::Extend(exts) => {
                for (t, p) in exts {
                    if !run(edges, pending.clone(), t, w * p, out)? {
                        return Ok(false);
                    }
                }
                return Ok(true);
            }
        }
    }
}
