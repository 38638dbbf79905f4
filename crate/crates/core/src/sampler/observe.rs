use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::ast::{BinOp, Dist, Expr, ExprKind, Name, Span, Value};
use crate::typesys::BaseType;

/// How a real observation is weighted.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum ObsClass {
    /// `observe (E - x)`, `observe (x - E)` or `observe x` on the draw
    /// `x ~ dist(params)`: the draw is fixed at `E` (or `0.0`) and the run is
    /// weighted by the density there.
    Supported {
        pivot: String,
        dist: Dist,
        params: String,
        /// `None` for `observe x`.
        at: Option<String>,
        /// `+1` for `x - E`, `-1` for `E - x`, `0` for a bare `x`.
        sign: i8,
    },
    Unsupported { reason: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct ObsAnnotation {
    pub span: Span,
    pub class: ObsClass,
}

/// Where each pivot draw is fixed, keyed by the draw's binder.
#[derive(Clone, Debug, Default)]
pub struct Annotated {
    pub observations: Vec<ObsAnnotation>,
    pub pivots: HashMap<Name, Option<Value>>,
    /// Addresses of the observe nodes the pivots account for.
    pub(crate) pivot_observes: HashSet<usize>,
}

fn addr(e: &Expr) -> usize {
    e as *const Expr as usize
}

impl Annotated {
    pub fn first_unsupported(&self) -> Option<(&Span, &str)> {
        self.observations.iter().find_map(|o| match &o.class {
            ObsClass::Unsupported { reason } => Some((&o.span, reason.as_str())),
            _ => None,
        })
    }
}

struct Draw {
    dist: Dist,
    params: Value,
    scope: HashSet<Name>,
}

/// The expression that produces the value of a let-chain.
fn tail(e: &Expr) -> &Expr {
    match &e.kind {
        ExprKind::Let(_, _, n) => tail(n),
        _ => e,
    }
}

#[derive(Default)]
struct Scan<'a> {
    defs: HashMap<Name, &'a Expr>,
    draws: HashMap<Name, Draw>,
    observes: Vec<&'a Expr>,
    scope: Vec<Name>,
}

impl<'a> Scan<'a> {
    fn walk(&mut self, e: &'a Expr) {
        match &e.kind {
            ExprKind::Let(x, m, n) => {
                self.walk(m);
                self.defs.insert(x.clone(), tail(m));
                if let ExprKind::Random(d, v) = &m.kind {
                    let scope = self.scope.iter().cloned().collect();
                    self.draws.insert(x.clone(), Draw { dist: *d, params: v.clone(), scope });
                }
                self.scope.push(x.clone());
                self.walk(n);
                self.scope.pop();
            }
            ExprKind::If(_, m, n) => {
                self.walk(m);
                self.walk(n);
            }
            ExprKind::For(x, _, m, _) => {
                self.scope.push(x.clone());
                self.walk(m);
                self.scope.pop();
            }
            ExprKind::Observe(_, Some(BaseType::Real)) => self.observes.push(e),
            _ => {}
        }
    }

    /// Follow `let y = x` aliases to the defining variable.
    fn root(&self, v: &Value) -> Value {
        let mut cur = v.clone();
        while let Value::Var(x) = &cur {
            match self.defs.get(x).map(|e| &e.kind) {
                Some(ExprKind::Value(next @ Value::Var(_))) => cur = next.clone(),
                _ => break,
            }
        }
        cur
    }

    fn draw_of(&self, v: &Value) -> Option<Name> {
        match self.root(v) {
            Value::Var(x) if self.draws.contains_key(&x) => Some(x),
            _ => None,
        }
    }

    /// `E` rewritten to something bound before the draw of `x`, if possible.
    fn available(&self, e: &Value, x: &Name) -> Option<Value> {
        let scope = &self.draws[x].scope;
        let ok = |v: &Value| {
            let mut fv = Vec::new();
            v.free_vars(&mut fv);
            fv.iter().all(|y| scope.contains(y))
        };
        if ok(e) {
            return Some(e.clone());
        }
        let r = self.root(e);
        ok(&r).then_some(r)
    }

    fn classify(&self, obs: &Expr) -> Result<(Name, Option<Value>, i8), String> {
        let ExprKind::Observe(v, _) = &obs.kind else { unreachable!() };
        if let Some(x) = self.draw_of(v) {
            return self.pivot(x, None, 0);
        }
        let Value::Var(t) = self.root(v) else {
            return Err(format!("observed value {v} is not defined by a subtraction involving a draw"));
        };
        let Some(ExprKind::Op(BinOp::Sub, a, b)) = self.defs.get(&t).map(|e| &e.kind) else {
            return Err(format!("observed value {v} is not of the form E - x, x - E or x for a draw x"));
        };
        let mut last = String::new();
        for (x, e, sign) in [(b, a, -1), (a, b, 1)] {
            if let Some(x) = self.draw_of(x) {
                match self.pivot(x, Some(e), sign) {
                    Ok(r) => return Ok(r),
                    Err(m) => last = m,
                }
            }
        }
        if last.is_empty() {
            last = format!("neither side of {a} - {b} is a draw");
        }
        Err(last)
    }

    fn pivot(&self, x: Name, e: Option<&Value>, sign: i8) -> Result<(Name, Option<Value>, i8), String> {
        let d = &self.draws[&x];
        if !d.dist.is_continuous() {
            return Err(format!("{x} is drawn from the discrete {}", d.dist));
        }
        match e {
            None => Ok((x, None, sign)),
            Some(e) => match self.available(e, &x) {
                Some(at) => Ok((x, Some(at), sign)),
                None => Err(format!("{e} is not known when {x} is drawn")),
            },
        }
    }
}

/// Number of pivot observes on `x` along every path, or `None` if paths disagree.
fn per_path(e: &Expr, targets: &HashSet<usize>) -> Option<u32> {
    match &e.kind {
        ExprKind::Observe(..) => Some(targets.contains(&addr(e)) as u32),
        ExprKind::Let(_, m, n) => Some(per_path(m, targets)? + per_path(n, targets)?),
        ExprKind::If(_, m, n) => {
            let (a, b) = (per_path(m, targets)?, per_path(n, targets)?);
            (a == b).then_some(a)
        }
        ExprKind::For(_, _, m, _) => (per_path(m, targets)? == 0).then_some(0),
        _ => Some(0),
    }
}

/// Variables whose value depends on `x`, through data or branch conditions.
fn tainted_result(e: &Expr, x: &Name) -> bool {
    fn mentions(e: &Expr, t: &HashSet<Name>) -> bool {
        e.free_vars().iter().any(|v| t.contains(v))
    }
    let mut t: HashSet<Name> = HashSet::from([x.clone()]);
    fn go(e: &Expr, t: &mut HashSet<Name>) -> bool {
        match &e.kind {
            ExprKind::Let(y, m, n) => {
                let m_taints = go(m, t) || mentions(m, t);
                if m_taints {
                    t.insert(y.clone());
                }
                go(n, t)
            }
            ExprKind::If(c, m, n) => {
                let mut fv = Vec::new();
                c.free_vars(&mut fv);
                let a = go(m, t);
                let b = go(n, t);
                a || b || fv.iter().any(|v| t.contains(v))
            }
            ExprKind::Observe(..) => false,
            _ => mentions(e, t),
        }
    }
    go(e, &mut t)
}

/// Classify every real-valued observation of a typed, array-free program.
pub fn observe_rewrite(e: &Expr) -> Annotated {
    let mut scan = Scan::default();
    scan.walk(e);
    let mut out = Annotated::default();
    let mut by_pivot: HashMap<Name, Vec<(usize, usize, Option<Value>)>> = HashMap::new();
    for obs in &scan.observes {
        let class = match scan.classify(obs) {
            Ok((x, at, sign)) => {
                let d = &scan.draws[&x];
                by_pivot.entry(x.clone()).or_default().push((out.observations.len(), addr(obs), at.clone()));
                ObsClass::Supported {
                    pivot: x.to_string(),
                    dist: d.dist,
                    params: d.params.to_string(),
                    at: at.map(|v| v.to_string()),
                    sign,
                }
            }
            Err(reason) => ObsClass::Unsupported { reason },
        };
        out.observations.push(ObsAnnotation { span: obs.span, class });
    }
    let mut pivots: Vec<_> = by_pivot.into_iter().collect();
    pivots.sort_by(|a, b| a.0.cmp(&b.0));
    for (x, uses) in pivots {
        let targets: HashSet<usize> = uses.iter().map(|u| u.1).collect();
        let same_point = uses.windows(2).all(|w| w[0].2 == w[1].2);
        let once = per_path(e, &targets) == Some(1);
        let reason = if !same_point {
            Some(format!("draw {x} is observed at different points"))
        } else if !once {
            Some(format!("draw {x} must be observed exactly once on every path"))
        } else if tainted_result(e, &x) {
            Some(format!("observed draw {x} flows into the result"))
        } else {
            None
        };
        match reason {
            Some(reason) => {
                for (i, ..) in &uses {
                    out.observations[*i].class = ObsClass::Unsupported { reason: reason.clone() };
                }
            }
            None => {
                out.pivots.insert(x.clone(), uses[0].2.clone());
                out.pivot_observes.extend(targets);
            }
        }
    }
    out
}
