//! Expand arrays into right-nested tuples.
//!
//! Literals become tuples, indexing becomes a chain of conditionals over
//! projections, and comprehensions are unrolled once per element with fresh
//! binders in every copy. Indices are reduced to `((i % n) + n) % n` first,
//! so the projection chain only ever sees an index in `[0, n)`.

use std::collections::HashMap;

use crate::ast::{BinOp, Expr, ExprKind, Fresh, Name, Side, Span, Value};
use crate::typesys::check::TypeError;
use crate::value::CanonValue;

/// Rewrite a type-checked expression into an array-free one. Types are
/// cleared; re-check the result to obtain its annotations.
pub fn unroll_arrays(e: &Expr, fresh: &mut Fresh) -> Result<Expr, TypeError> {
    let sp = e.span;
    Ok(match &e.kind {
        ExprKind::Array(vs) => Expr::value(Value::tuple(vs.clone()), sp),
        ExprKind::Index(a, i, r) => {
            let r = r.ok_or_else(|| unchecked(sp))?;
            index_expr(a.clone(), i.clone(), r.size, sp, fresh)
        }
        ExprKind::For(x, v, body, r) => {
            let r = r.ok_or_else(|| unchecked(sp))?;
            let body = unroll_arrays(body, fresh)?;
            comprehension(x, v, &body, r.size, sp, fresh)
        }
        ExprKind::If(c, m, n) => Expr::new(
            ExprKind::If(c.clone(), Box::new(unroll_arrays(m, fresh)?), Box::new(unroll_arrays(n, fresh)?)),
            sp,
        ),
        ExprKind::Let(x, m, n) => Expr::let_(x.clone(), unroll_arrays(m, fresh)?, unroll_arrays(n, fresh)?, sp),
        other => Expr::new(other.clone(), sp),
    })
}

fn unchecked(span: Span) -> TypeError {
    TypeError { rule: "Unroll", message: "array construct lacks a range annotation".into(), span }
}

fn int(i: i64) -> Value {
    Value::Const(CanonValue::Int(i))
}

fn op(o: BinOp, a: Value, b: Value, sp: Span) -> Expr {
    Expr::new(ExprKind::Op(o, a, b), sp)
}

/// `a.[i]` at an array of length `n`.
fn index_expr(a: Value, i: Value, n: usize, sp: Span, fresh: &mut Fresh) -> Expr {
    if n == 1 {
        return Expr::value(a, sp);
    }
    let len = int(n as i64);
    let k1 = fresh.tmp();
    let k2 = fresh.tmp();
    let k = fresh.tmp();
    let pick = pi(n, a, Value::Var(k.clone()), sp, fresh);
    Expr::let_(
        k1.clone(),
        op(BinOp::Mod, i, len.clone(), sp),
        Expr::let_(
            k2.clone(),
            op(BinOp::Add, Value::Var(k1), len.clone(), sp),
            Expr::let_(k, op(BinOp::Mod, Value::Var(k2), len, sp), pick, sp),
            sp,
        ),
        sp,
    )
}

/// `pi_m(M, N) = if N % m = 0 then M.1 else pi_{m-1}(M.2, N - 1)`, `pi_1(M, N) = M`.
fn pi(m: usize, tuple: Value, idx: Value, sp: Span, fresh: &mut Fresh) -> Expr {
    if m == 1 {
        return Expr::value(tuple, sp);
    }
    let z = fresh.tmp();
    let c = fresh.tmp();
    let rest = fresh.tmp();
    let idx1 = fresh.tmp();
    let deeper = pi(m - 1, Value::Var(rest.clone()), Value::Var(idx1.clone()), sp, fresh);
    let else_branch = Expr::let_(
        rest,
        Expr::new(ExprKind::Proj(Side::Snd, tuple.clone()), sp),
        Expr::let_(idx1, op(BinOp::Sub, idx.clone(), int(1), sp), deeper, sp),
        sp,
    );
    Expr::let_(
        z.clone(),
        op(BinOp::Mod, idx, int(m as i64), sp),
        Expr::let_(
            c.clone(),
            op(BinOp::Eq, Value::Var(z), int(0), sp),
            Expr::new(
                ExprKind::If(
                    Value::Var(c),
                    Box::new(Expr::new(ExprKind::Proj(Side::Fst, tuple), sp)),
                    Box::new(else_branch),
                ),
                sp,
            ),
            sp,
        ),
        sp,
    )
}

/// `[for x in v -> body]` over `n` elements.
fn comprehension(x: &Name, v: &Value, body: &Expr, n: usize, sp: Span, fresh: &mut Fresh) -> Expr {
    let mut results = Vec::with_capacity(n);
    let mut copies = Vec::with_capacity(n);
    for i in 0..n {
        let y = fresh.tmp();
        let xi = fresh.like(x);
        let mut map = HashMap::new();
        map.insert(x.clone(), xi.clone());
        let body_i = rename(body, &mut map, fresh);
        // Walk to element i: i steps along `.2`, then `.1` unless it is the last.
        let mut steps = Vec::new();
        let mut cur = v.clone();
        for _ in 0..i {
            let t = fresh.tmp();
            steps.push((t.clone(), Expr::new(ExprKind::Proj(Side::Snd, cur), sp)));
            cur = Value::Var(t);
        }
        let elem = if n > 1 && i < n - 1 {
            Expr::new(ExprKind::Proj(Side::Fst, cur), sp)
        } else {
            Expr::value(cur, sp)
        };
        let mut inner = Expr::let_(xi, elem, body_i, sp);
        for (t, proj) in steps.into_iter().rev() {
            inner = Expr::let_(t, proj, inner, sp);
        }
        results.push(Value::Var(y.clone()));
        copies.push((y, inner));
    }
    let mut out = Expr::value(Value::tuple(results), sp);
    for (y, inner) in copies.into_iter().rev() {
        out = Expr::let_(y, inner, out, sp);
    }
    out
}

/// Copy `e`, giving every binder a fresh name. `map` renames free occurrences.
pub fn rename(e: &Expr, map: &mut HashMap<Name, Name>, fresh: &mut Fresh) -> Expr {
    fn val(v: &Value, map: &HashMap<Name, Name>) -> Value {
        match v {
            Value::Var(x) => Value::Var(map.get(x).cloned().unwrap_or_else(|| x.clone())),
            Value::Const(c) => Value::Const(c.clone()),
            Value::Pair(a, b) => Value::pair(val(a, map), val(b, map)),
        }
    }
    let kind = match &e.kind {
        ExprKind::Value(v) => ExprKind::Value(val(v, map)),
        ExprKind::Op(o, a, b) => ExprKind::Op(*o, val(a, map), val(b, map)),
        ExprKind::Proj(s, v) => ExprKind::Proj(*s, val(v, map)),
        ExprKind::If(c, m, n) => {
            ExprKind::If(val(c, map), Box::new(rename(m, map, fresh)), Box::new(rename(n, map, fresh)))
        }
        ExprKind::Let(x, m, n) => {
            let m2 = rename(m, map, fresh);
            let x2 = fresh.like(x);
            let prev = map.insert(x.clone(), x2.clone());
            let n2 = rename(n, map, fresh);
            restore(map, x, prev);
            ExprKind::Let(x2, Box::new(m2), Box::new(n2))
        }
        ExprKind::Random(d, v) => ExprKind::Random(*d, val(v, map)),
        ExprKind::Observe(v, b) => ExprKind::Observe(val(v, map), *b),
        ExprKind::Array(vs) => ExprKind::Array(vs.iter().map(|v| val(v, map)).collect()),
        ExprKind::Index(a, i, r) => ExprKind::Index(val(a, map), val(i, map), *r),
        ExprKind::For(x, v, m, r) => {
            let v2 = val(v, map);
            let x2 = fresh.like(x);
            let prev = map.insert(x.clone(), x2.clone());
            let m2 = rename(m, map, fresh);
            restore(map, x, prev);
            ExprKind::For(x2, v2, Box::new(m2), *r)
        }
    };
    Expr { kind, span: e.span, ty: e.ty.clone() }
}

fn restore(map: &mut HashMap<Name, Name>, x: &Name, prev: Option<Name>) {
    match prev {
        Some(p) => {
            map.insert(x.clone(), p);
        }
        None => {
            map.remove(x);
        }
    }
}
