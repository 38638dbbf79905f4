//! Core Fun syntax in A-normal form.
//!
//! Surface programs are desugared into this form; every later stage
//! (type checking, semantics, compilation, sampling) consumes it.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::typesys::{BaseType, RangeId, Type};
use crate::value::CanonValue;

pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// Byte offsets plus 1-based line and column of the first byte.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn to(self, other: Span) -> Span {
        Span { end: other.end.max(self.end), ..self }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum BinOp {
    And,
    Or,
    Eq,
    Gt,
    Add,
    Sub,
    Mul,
    Mod,
    /// Equality under `observe`; the type checker resolves it to `Eq`, or
    /// to `Sub` when the operands are real.
    ObsEq,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Eq => "=",
            BinOp::Gt => ">",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Mod => "%",
            BinOp::ObsEq => "=?",
        }
    }

    pub fn from_symbol(s: &str) -> Option<BinOp> {
        Some(match s {
            "&&" => BinOp::And,
            "||" => BinOp::Or,
            "=" => BinOp::Eq,
            ">" => BinOp::Gt,
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "%" => BinOp::Mod,
            _ => return None,
        })
    }
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Dist {
    Bernoulli,
    Binomial,
    Poisson,
    DiscreteUniform,
    Gaussian,
    Beta,
    Gamma,
}

impl Dist {
    pub const ALL: [Dist; 7] = [
        Dist::Bernoulli,
        Dist::Binomial,
        Dist::Poisson,
        Dist::DiscreteUniform,
        Dist::Gaussian,
        Dist::Beta,
        Dist::Gamma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Dist::Bernoulli => "Bernoulli",
            Dist::Binomial => "Binomial",
            Dist::Poisson => "Poisson",
            Dist::DiscreteUniform => "DiscreteUniform",
            Dist::Gaussian => "Gaussian",
            Dist::Beta => "Beta",
            Dist::Gamma => "Gamma",
        }
    }

    pub fn from_name(s: &str) -> Option<Dist> {
        Dist::ALL.into_iter().find(|d| d.name() == s)
    }

    pub fn param_types(self) -> &'static [BaseType] {
        use BaseType::*;
        match self {
            Dist::Bernoulli | Dist::Poisson => &[Real],
            Dist::Binomial => &[Int, Real],
            Dist::DiscreteUniform => &[Int],
            Dist::Gaussian | Dist::Beta | Dist::Gamma => &[Real, Real],
        }
    }

    /// Parameter type as a right-nested tuple.
    pub fn param_type(self) -> Type {
        Type::tuple(self.param_types().iter().map(|b| Type::Base(*b)).collect())
    }

    pub fn result_type(self) -> BaseType {
        match self {
            Dist::Bernoulli => BaseType::Bool,
            Dist::Binomial | Dist::Poisson | Dist::DiscreteUniform => BaseType::Int,
            Dist::Gaussian | Dist::Beta | Dist::Gamma => BaseType::Real,
        }
    }

    pub fn is_continuous(self) -> bool {
        self.result_type() == BaseType::Real
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    Fst,
    Snd,
}

impl Side {
    pub fn index(self) -> u8 {
        match self {
            Side::Fst => 1,
            Side::Snd => 2,
        }
    }
}

/// Syntactic values `V ::= x | c | (V, V)`. Constants are scalars or unit.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Var(Name),
    Const(CanonValue),
    Pair(Box<Value>, Box<Value>),
}

impl Value {
    pub fn var(s: &str) -> Value {
        Value::Var(name(s))
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }

    /// Right-nested tuple of values.
    pub fn tuple(items: Vec<Value>) -> Value {
        let mut it = items.into_iter().rev();
        match it.next() {
            None => Value::Const(CanonValue::Unit),
            Some(last) => it.fold(last, |acc, v| Value::pair(v, acc)),
        }
    }

    pub fn from_canon(c: &CanonValue) -> Value {
        match c {
            CanonValue::Pair(a, b) => Value::pair(Value::from_canon(a), Value::from_canon(b)),
            other => Value::Const(other.clone()),
        }
    }

    /// The value denoted by a closed syntactic value.
    pub fn to_canon(&self) -> Option<CanonValue> {
        match self {
            Value::Var(_) => None,
            Value::Const(c) => Some(c.clone()),
            Value::Pair(a, b) => Some(CanonValue::pair(a.to_canon()?, b.to_canon()?)),
        }
    }

    pub fn free_vars(&self, out: &mut Vec<Name>) {
        match self {
            Value::Var(x) => out.push(x.clone()),
            Value::Const(_) => {}
            Value::Pair(a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
        }
    }

    pub fn mentions(&self, x: &str) -> bool {
        match self {
            Value::Var(y) => &**y == x,
            Value::Const(_) => false,
            Value::Pair(a, b) => a.mentions(x) || b.mentions(x),
        }
    }

    pub fn subst(&self, x: &str, v: &Value) -> Value {
        match self {
            Value::Var(y) if &**y == x => v.clone(),
            Value::Pair(a, b) => Value::pair(a.subst(x, v), b.subst(x, v)),
            other => other.clone(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Var(x) => f.write_str(x),
            Value::Const(c) => write!(f, "{c}"),
            Value::Pair(a, b) => write!(f, "({a}, {b})"),
        }
    }
}

/// A core expression with its source span and, after type checking, its type.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
    pub ty: Option<Type>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Value(Value),
    Op(BinOp, Value, Value),
    Proj(Side, Value),
    If(Value, Box<Expr>, Box<Expr>),
    Let(Name, Box<Expr>, Box<Expr>),
    Random(Dist, Value),
    /// The base type of the observed value is filled in by the type checker.
    Observe(Value, Option<BaseType>),
    /// Array literal `[V0; ...; Vn-1]`.
    Array(Vec<Value>),
    /// `V1.[V2]`; the range of `V1` is filled in by the type checker.
    Index(Value, Value, Option<RangeId>),
    /// `[for x in V -> M]`.
    For(Name, Value, Box<Expr>, Option<RangeId>),
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Expr {
        Expr { kind, span, ty: None }
    }

    pub fn value(v: Value, span: Span) -> Expr {
        Expr::new(ExprKind::Value(v), span)
    }

    pub fn let_(x: Name, m: Expr, n: Expr, span: Span) -> Expr {
        Expr::new(ExprKind::Let(x, Box::new(m), Box::new(n)), span)
    }

    pub fn as_value(&self) -> Option<&Value> {
        match &self.kind {
            ExprKind::Value(v) => Some(v),
            _ => None,
        }
    }

    pub fn has_arrays(&self) -> bool {
        match &self.kind {
            ExprKind::Array(_) | ExprKind::Index(..) | ExprKind::For(..) => true,
            ExprKind::If(_, m, n) | ExprKind::Let(_, m, n) => m.has_arrays() || n.has_arrays(),
            _ => false,
        }
    }

    /// Capture-avoiding substitution `M[V/x]` for closed `V`.
    pub fn subst(&self, x: &str, v: &Value) -> Expr {
        let kind = match &self.kind {
            ExprKind::Value(w) => ExprKind::Value(w.subst(x, v)),
            ExprKind::Op(op, a, b) => ExprKind::Op(*op, a.subst(x, v), b.subst(x, v)),
            ExprKind::Proj(s, w) => ExprKind::Proj(*s, w.subst(x, v)),
            ExprKind::If(c, m, n) => {
                ExprKind::If(c.subst(x, v), Box::new(m.subst(x, v)), Box::new(n.subst(x, v)))
            }
            ExprKind::Let(y, m, n) => {
                let n2 = if &**y == x { (**n).clone() } else { n.subst(x, v) };
                ExprKind::Let(y.clone(), Box::new(m.subst(x, v)), Box::new(n2))
            }
            ExprKind::Random(d, w) => ExprKind::Random(*d, w.subst(x, v)),
            ExprKind::Observe(w, b) => ExprKind::Observe(w.subst(x, v), *b),
            ExprKind::Array(ws) => ExprKind::Array(ws.iter().map(|w| w.subst(x, v)).collect()),
            ExprKind::Index(a, i, r) => ExprKind::Index(a.subst(x, v), i.subst(x, v), *r),
            ExprKind::For(y, w, m, r) => {
                let m2 = if &**y == x { (**m).clone() } else { m.subst(x, v) };
                ExprKind::For(y.clone(), w.subst(x, v), Box::new(m2), *r)
            }
        };
        Expr { kind, span: self.span, ty: self.ty.clone() }
    }

    /// Every binder in pre-order.
    pub fn binders(&self) -> Vec<Name> {
        fn go(e: &Expr, out: &mut Vec<Name>) {
            match &e.kind {
                ExprKind::Let(x, m, n) => {
                    out.push(x.clone());
                    go(m, out);
                    go(n, out);
                }
                ExprKind::If(_, m, n) => {
                    go(m, out);
                    go(n, out);
                }
                ExprKind::For(x, _, m, _) => {
                    out.push(x.clone());
                    go(m, out);
                }
                _ => {}
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    /// Free variables, each listed once in first-occurrence order.
    pub fn free_vars(&self) -> Vec<Name> {
        fn go(e: &Expr, bound: &mut Vec<Name>, out: &mut Vec<Name>) {
            let mut vals = Vec::new();
            match &e.kind {
                ExprKind::Value(v) | ExprKind::Proj(_, v) | ExprKind::Random(_, v) | ExprKind::Observe(v, _) => {
                    v.free_vars(&mut vals)
                }
                ExprKind::Op(_, a, b) | ExprKind::Index(a, b, _) => {
                    a.free_vars(&mut vals);
                    b.free_vars(&mut vals);
                }
                ExprKind::Array(vs) => vs.iter().for_each(|v| v.free_vars(&mut vals)),
                ExprKind::If(c, m, n) => {
                    c.free_vars(&mut vals);
                    push_new(&vals, bound, out);
                    go(m, bound, out);
                    go(n, bound, out);
                    return;
                }
                ExprKind::Let(x, m, n) => {
                    go(m, bound, out);
                    bound.push(x.clone());
                    go(n, bound, out);
                    bound.pop();
                    return;
                }
                ExprKind::For(x, v, m, _) => {
                    v.free_vars(&mut vals);
                    push_new(&vals, bound, out);
                    bound.push(x.clone());
                    go(m, bound, out);
                    bound.pop();
                    return;
                }
            }
            push_new(&vals, bound, out);
        }
        fn push_new(vals: &[Name], bound: &[Name], out: &mut Vec<Name>) {
            for v in vals {
                if !bound.contains(v) && !out.contains(v) {
                    out.push(v.clone());
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Whether all binders are pairwise distinct and distinct from free variables.
    pub fn binders_are_fresh(&self) -> bool {
        let binders = self.binders();
        let mut seen = std::collections::HashSet::new();
        let free = self.free_vars();
        binders.iter().all(|b| seen.insert(b.clone()) && !free.contains(b))
    }

    pub fn count_nodes(&self) -> usize {
        1 + match &self.kind {
            ExprKind::If(_, m, n) | ExprKind::Let(_, m, n) => m.count_nodes() + n.count_nodes(),
            ExprKind::For(_, _, m, _) => m.count_nodes(),
            _ => 0,
        }
    }
}

/// Supply of fresh names for one compilation unit.
///
/// Temporaries are `%d0, %d1, ...`; a user binder keeps its name the first
/// time and becomes `x%1, x%2, ...` afterwards. `%` cannot occur in source
/// identifiers, so generated names never capture user names.
#[derive(Debug, Default, Clone)]
pub struct Fresh {
    next_tmp: usize,
    used: HashMap<String, usize>,
}

impl Fresh {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn tmp(&mut self) -> Name {
        let n = name(&format!("%d{}", self.next_tmp));
        self.next_tmp += 1;
        n
    }

    /// A fresh variant of a user or generated name.
    pub fn like(&mut self, base: &str) -> Name {
        let root = base.split('%').next().filter(|r| !r.is_empty());
        let root = match root {
            Some(r) => r.to_string(),
            None => return self.tmp(),
        };
        let count = self.used.entry(root.clone()).or_insert(0);
        let n = if *count == 0 { root.clone() } else { format!("{root}%{count}") };
        *count += 1;
        name(&n)
    }

    /// Reserve names that are already bound (e.g. free variables of an open term).
    pub fn reserve(&mut self, x: &str) {
        if let Some(k) = x.strip_prefix("%d").and_then(|r| r.parse::<usize>().ok()) {
            self.next_tmp = self.next_tmp.max(k + 1);
            return;
        }
        let (root, k) = match x.split_once('%') {
            Some((root, k)) => (root, k.parse::<usize>().unwrap_or(0)),
            None => (x, 0),
        };
        let count = self.used.entry(root.to_string()).or_insert(0);
        *count = (*count).max(k + 1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_names_follow_generation_order() {
        let mut f = Fresh::new();
        assert_eq!(&*f.tmp(), "%d0");
        assert_eq!(&*f.like("x"), "x");
        assert_eq!(&*f.like("x"), "x%1");
        assert_eq!(&*f.tmp(), "%d1");
        assert_eq!(&*f.like("x%1"), "x%2");
        assert_eq!(&*f.like("%d0"), "%d2");
    }

    #[test]
    fn reserve_skips_existing_names() {
        let mut f = Fresh::new();
        f.reserve("y");
        f.reserve("%d4");
        assert_eq!(&*f.like("y"), "y%1");
        assert_eq!(&*f.tmp(), "%d5");
    }

    #[test]
    fn substitution_stops_at_shadowing_binder() {
        let sp = Span::default();
        let body = Expr::let_(
            name("x"),
            Expr::value(Value::var("x"), sp),
            Expr::value(Value::var("x"), sp),
            sp,
        );
        let out = body.subst("x", &Value::Const(CanonValue::Int(1)));
        match out.kind {
            ExprKind::Let(_, m, n) => {
                assert_eq!(m.as_value(), Some(&Value::Const(CanonValue::Int(1))));
                assert_eq!(n.as_value(), Some(&Value::var("x")));
            }
            _ => unreachable!(),
        }
    }
}
