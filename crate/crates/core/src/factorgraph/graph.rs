use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::ast::{BinOp, Dist};
use crate::imp::{hoist_locals, Block, ImpExpr, ImpType, Loc, Stmt};
use crate::typesys::BaseType;
use crate::value::CanonValue;
use crate::{Error, Result};

pub type Var = Loc;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Edge {
    Equal { x: Var, y: Var },
    Const { x: Var, value: CanonValue },
    Op { x: Var, op: BinOp, y: Var, z: Var },
    Sample { x: Var, dist: Dist, args: Vec<Var> },
    Gate { cond: Var, then: Graph, r#else: Graph },
}

/// `new(x̄:b̄){e1, ..., em}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Graph {
    pub bound: Vec<(Var, BaseType)>,
    pub edges: Vec<Edge>,
}

/// `impfg(hoist(C))`.
pub fn build_graph(c: &Block) -> Result<Graph> {
    impfg(&hoist_locals(c))
}

fn base_of(t: &ImpType) -> Result<BaseType> {
    match t {
        ImpType::Base(b) => Ok(*b),
        ImpType::Array(..) => Err(Error::Internal("array locations must be unrolled before building a graph".into())),
    }
}

fn impfg(c: &Block) -> Result<Graph> {
    if let [Stmt::Local(ls, body)] = c.0.as_slice() {
        let mut g = impfg(body)?;
        let mut bound = Vec::new();
        for (l, t) in ls {
            bound.push((*l, base_of(t)?));
        }
        bound.extend(g.bound);
        g.bound = bound;
        return Ok(g);
    }
    Ok(Graph { bound: Vec::new(), edges: impeg(c)? })
}

fn impeg(c: &Block) -> Result<Vec<Edge>> {
    let mut out = Vec::new();
    for s in &c.0 {
        out.push(match s {
            Stmt::Assign(x, ImpExpr::Const(c)) => Edge::Const { x: *x, value: c.clone() },
            Stmt::Assign(x, ImpExpr::Loc(y)) => Edge::Equal { x: *x, y: *y },
            Stmt::Assign(x, ImpExpr::Op(op, y, z)) => Edge::Op { x: *x, op: *op, y: *y, z: *z },
            Stmt::Random(x, d, args) => Edge::Sample { x: *x, dist: *d, args: args.clone() },
            Stmt::Observe(b, l) => Edge::Const { x: *l, value: b.zero() },
            Stmt::If(l, a, b) => Edge::Gate { cond: *l, then: impfg(a)?, r#else: impfg(b)? },
            Stmt::Local(..) => return Err(Error::Internal("locals must be hoisted before building a graph".into())),
            Stmt::Assign(_, ImpExpr::Elem(..)) | Stmt::AssignAt(..) | Stmt::For(..) => {
                return Err(Error::Internal("arrays and loops must be unrolled before building a graph".into()))
            }
        });
    }
    Ok(out)
}

impl Edge {
    /// Variables in order of occurrence.
    pub fn vars(&self) -> Vec<Var> {
        match self {
            Edge::Equal { x, y } => vec![*x, *y],
            Edge::Const { x, .. } => vec![*x],
            Edge::Op { x, y, z, .. } => vec![*x, *y, *z],
            Edge::Sample { x, args, .. } => std::iter::once(*x).chain(args.iter().copied()).collect(),
            Edge::Gate { cond, then, r#else } => {
                let mut v = vec![*cond];
                v.extend(then.vars());
                v.extend(r#else.vars());
                v
            }
        }
    }

    fn rename(&mut self, from: Var, to: Var) {
        let f = |v: &mut Var| {
            if *v == from {
                *v = to
            }
        };
        match self {
            Edge::Equal { x, y } => {
                f(x);
                f(y)
            }
            Edge::Const { x, .. } => f(x),
            Edge::Op { x, y, z, .. } => {
                f(x);
                f(y);
                f(z)
            }
            Edge::Sample { x, args, .. } => {
                f(x);
                args.iter_mut().for_each(f)
            }
            Edge::Gate { cond, then, r#else } => {
                f(cond);
                then.rename(from, to);
                r#else.rename(from, to);
            }
        }
    }
}

impl Graph {
    /// Edges, counting those inside gates.
    pub fn edge_count(&self) -> usize {
        self.edges
            .iter()
            .map(|e| match e {
                Edge::Gate { then, r#else, .. } => 1 + then.edge_count() + r#else.edge_count(),
                _ => 1,
            })
            .sum()
    }

    /// Every variable occurrence, including bound declarations.
    pub fn vars(&self) -> Vec<Var> {
        let mut v: Vec<Var> = self.bound.iter().map(|(x, _)| *x).collect();
        for e in &self.edges {
            v.extend(e.vars());
        }
        v
    }

    /// `fv(G)`.
    pub fn free_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for e in &self.edges {
            let inner = match e {
                Edge::Gate { cond, then, r#else } => {
                    let mut v = vec![*cond];
                    v.extend(then.free_vars());
                    v.extend(r#else.free_vars());
                    v
                }
                other => other.vars(),
            };
            for x in inner {
                if !self.bound.iter().any(|(b, _)| *b == x) && !out.contains(&x) {
                    out.push(x);
                }
            }
        }
        out
    }

    fn rename(&mut self, from: Var, to: Var) {
        for (b, _) in &mut self.bound {
            if *b == from {
                *b = to;
            }
        }
        for e in &mut self.edges {
            e.rename(from, to);
        }
    }

    /// Remove equalities with a variable bound in the same scope, and merge
    /// bound variables defined by the same constant. Preserves the semantics.
    pub fn simplify(&self) -> Graph {
        let mut g = self.clone();
        loop {
            if !g.simplify_step() {
                break;
            }
        }
        for e in &mut g.edges {
            if let Edge::Gate { then, r#else, .. } = e {
                *then = then.simplify();
                *r#else = r#else.simplify();
            }
        }
        g
    }

    fn simplify_step(&mut self) -> bool {
        let is_bound = |g: &Graph, v: Var| g.bound.iter().any(|(b, _)| *b == v);
        for i in 0..self.edges.len() {
            if let Edge::Equal { x, y } = self.edges[i] {
                let (keep, gone) = if is_bound(self, y) {
                    (x, y)
                } else if is_bound(self, x) {
                    (y, x)
                } else {
                    continue;
                };
                self.edges.remove(i);
                self.bound.retain(|(b, _)| *b != gone);
                self.rename(gone, keep);
                return true;
            }
        }
        let mut seen: BTreeMap<String, Var> = BTreeMap::new();
        for i in 0..self.edges.len() {
            if let Edge::Const { x, value } = &self.edges[i] {
                if !is_bound(self, *x) {
                    continue;
                }
                let key = format!("{value:?}");
                match seen.get(&key) {
                    Some(&first) if first != *x => {
                        let gone = *x;
                        self.edges.remove(i);
                        self.bound.retain(|(b, _)| *b != gone);
                        self.rename(gone, first);
                        return true;
                    }
                    _ => {
                        seen.insert(key, *x);
                    }
                }
            }
        }
        false
    }

    /// A rendering with variables renamed `v0, v1, ...` by first occurrence,
    /// so isomorphic graphs print identically.
    pub fn canonical(&self, top_binders: bool) -> String {
        let mut names: Vec<Var> = Vec::new();
        for v in self.edges.iter().flat_map(|e| e.vars()).chain(self.vars()) {
            if !names.contains(&v) {
                names.push(v);
            }
        }
        let name = |v: &Var| format!("v{}", names.iter().position(|n| n == v).expect("every variable is named"));
        let mut out = String::new();
        self.render(&name, top_binders, &mut out);
        out
    }

    fn render(&self, name: &dyn Fn(&Var) -> String, binders: bool, out: &mut String) {
        if binders && !self.bound.is_empty() {
            let mut bs: Vec<String> = self.bound.iter().map(|(x, b)| format!("{}:{}", name(x), b.name())).collect();
            bs.sort();
            out.push_str(&format!("new({})", bs.join(", ")));
        }
        out.push('{');
        for (i, e) in self.edges.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            match e {
                Edge::Equal { x, y } => out.push_str(&format!("Equal({}, {})", name(x), name(y))),
                Edge::Const { x, value } => out.push_str(&format!("Constant({}, {value})", name(x))),
                Edge::Op { x, op, y, z } => out.push_str(&format!("Binop({}, {op}, {}, {})", name(x), name(y), name(z))),
                Edge::Sample { x, dist, args } => {
                    let a: Vec<String> = args.iter().map(name).collect();
                    out.push_str(&format!("Sample({}, {dist}, {})", name(x), a.join(", ")))
                }
                Edge::Gate { cond, then, r#else } => {
                    out.push_str(&format!("Gate({}, ", name(cond)));
                    then.render(name, true, out);
                    out.push_str(", ");
                    r#else.render(name, true, out);
                    out.push(')');
                }
            }
        }
        out.push('}');
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        self.render(&|v: &Var| v.to_string(), true, &mut out);
        f.write_str(&out)
    }
}
