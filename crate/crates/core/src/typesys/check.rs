use thiserror::Error;

use crate::ast::{BinOp, Expr, ExprKind, Side, Span, Value};
use crate::typesys::types::{op_result, op_signatures, BaseType, RangeId, Type, TypeEnv};
use crate::value::CanonValue;

/// A typing failure, naming the rule whose premise did not hold.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("type error [{rule}] at {span}: {message}")]
pub struct TypeError {
    pub rule: &'static str,
    pub message: String,
    pub span: Span,
}

fn fail<T>(rule: &'static str, span: Span, message: impl Into<String>) -> Result<T, TypeError> {
    Err(TypeError { rule, message: message.into(), span })
}

pub fn type_of_const(c: &CanonValue) -> Option<Type> {
    match c {
        CanonValue::Unit => Some(Type::Unit),
        CanonValue::Pair(a, b) => Some(Type::pair(type_of_const(a)?, type_of_const(b)?)),
        other => BaseType::of_value(other).map(Type::Base),
    }
}

pub fn type_of_value(v: &Value, env: &TypeEnv, span: Span) -> Result<Type, TypeError> {
    match v {
        Value::Var(x) => match env.lookup(x) {
            Some(t) => Ok(t.clone()),
            None => fail("Fun Var", span, format!("unbound variable `{x}`")),
        },
        Value::Const(c) => match type_of_const(c) {
            Some(t) => Ok(t),
            None => fail("Fun Const", span, format!("ill-formed constant {c}")),
        },
        Value::Pair(a, b) => Ok(Type::pair(type_of_value(a, env, span)?, type_of_value(b, env, span)?)),
    }
}

fn base_of(t: &Type, rule: &'static str, span: Span, what: &str) -> Result<BaseType, TypeError> {
    t.as_base()
        .map_or_else(|| fail(rule, span, format!("{what} has type {t}, expected a base type")), Ok)
}

/// Check `e` under `env`, caching each node's type and filling the observe,
/// index and comprehension annotations. Equality written under `observe`
/// is resolved here: `=` at bool or int, subtraction at real.
pub fn typecheck(e: &mut Expr, env: &TypeEnv) -> Result<Type, TypeError> {
    let mut env = env.clone();
    check(e, &mut env)
}

/// Type of `e` without mutating it.
pub fn type_of(e: &Expr, env: &TypeEnv) -> Result<Type, TypeError> {
    typecheck(&mut e.clone(), env)
}

fn check(e: &mut Expr, env: &mut TypeEnv) -> Result<Type, TypeError> {
    let span = e.span;
    let ty = match &mut e.kind {
        ExprKind::Value(v) => type_of_value(v, env, span)?,
        ExprKind::Op(op, a, b) => {
            let ta = type_of_value(a, env, span)?;
            let tb = type_of_value(b, env, span)?;
            let ba = base_of(&ta, "Fun Operator", span, "left operand")?;
            let bb = base_of(&tb, "Fun Operator", span, "right operand")?;
            if *op == BinOp::ObsEq {
                *op = if ba == BaseType::Real { BinOp::Sub } else { BinOp::Eq };
            }
            match op_result(*op, ba, bb) {
                Some(r) => Type::Base(r),
                None => {
                    let sigs: Vec<String> = op_signatures(*op)
                        .iter()
                        .map(|(x, y, r)| format!("{x},{y}->{r}"))
                        .collect();
                    return fail(
                        "Fun Operator",
                        span,
                        format!("no signature of `{op}` accepts {ba},{bb} (have {})", sigs.join(" | ")),
                    );
                }
            }
        }
        ExprKind::Proj(side, v) => match type_of_value(v, env, span)? {
            Type::Pair(a, b) => match side {
                Side::Fst => *a,
                Side::Snd => *b,
            },
            t => {
                let rule = if *side == Side::Fst { "Fun Proj1" } else { "Fun Proj2" };
                return fail(rule, span, format!("projection from non-pair type {t}"));
            }
        },
        ExprKind::If(c, m, n) => {
            let tc = type_of_value(c, env, span)?;
            if tc != Type::BOOL {
                return fail("Fun If", span, format!("condition has type {tc}, expected bool"));
            }
            let tm = check(m, env)?;
            let tn = check(n, env)?;
            if tm != tn {
                return fail("Fun If", span, format!("branches disagree: {tm} vs {tn}"));
            }
            tm
        }
        ExprKind::Let(x, m, n) => {
            if env.contains(x) {
                return fail("Fun Let", span, format!("`{x}` is already bound"));
            }
            let tm = check(m, env)?;
            env.push(x.clone(), tm);
            let tn = check(n, env);
            env.pop();
            tn?
        }
        ExprKind::Random(d, v) => {
            let tv = type_of_value(v, env, span)?;
            let want = d.param_type();
            if tv != want {
                return fail("Fun Random", span, format!("{d} expects parameters of type {want}, got {tv}"));
            }
            Type::Base(d.result_type())
        }
        ExprKind::Observe(v, ann) => {
            let tv = type_of_value(v, env, span)?;
            *ann = Some(base_of(&tv, "Fun Observe", span, "observed value")?);
            Type::Unit
        }
        ExprKind::Array(vs) => {
            if vs.is_empty() {
                return fail("Fun Array", span, "array literals must be non-empty");
            }
            let t0 = type_of_value(&vs[0], env, span)?;
            if t0.has_array() {
                return fail("Fun Array", span, "arrays of arrays are not supported");
            }
            for v in vs.iter().skip(1) {
                let t = type_of_value(v, env, span)?;
                if t != t0 {
                    return fail("Fun Array", span, format!("element types disagree: {t0} vs {t}"));
                }
            }
            Type::Array(Box::new(t0), RangeId { size: vs.len() })
        }
        ExprKind::Index(a, i, ann) => {
            let ta = type_of_value(a, env, span)?;
            let ti = type_of_value(i, env, span)?;
            if ti != Type::INT {
                return fail("Fun Index", span, format!("index has type {ti}, expected int"));
            }
            match ta {
                Type::Array(t, r) => {
                    *ann = Some(r);
                    *t
                }
                t => return fail("Fun Index", span, format!("indexing non-array type {t}")),
            }
        }
        ExprKind::For(x, v, body, ann) => {
            let tv = type_of_value(v, env, span)?;
            let (elem, r) = match tv {
                Type::Array(t, r) => (*t, r),
                t => return fail("Fun For", span, format!("iterating over non-array type {t}")),
            };
            if env.contains(x) {
                return fail("Fun For", span, format!("`{x}` is already bound"));
            }
            if body.has_arrays_excluding_index() {
                return fail("Fun For", span, "nested iteration: comprehension bodies may not build arrays");
            }
            env.push(x.clone(), elem);
            let tb = check(body, env);
            env.pop();
            let tb = tb?;
            if tb.has_array() {
                return fail("Fun For", span, format!("comprehension body has array type {tb}"));
            }
            *ann = Some(r);
            Type::Array(Box::new(tb), r)
        }
    };
    e.ty = Some(ty.clone());
    Ok(ty)
}

impl Expr {
    fn has_arrays_excluding_index(&self) -> bool {
        match &self.kind {
            ExprKind::Array(_) | ExprKind::For(..) => true,
            ExprKind::If(_, m, n) | ExprKind::Let(_, m, n) => {
                m.has_arrays_excluding_index() || n.has_arrays_excluding_index()
            }
            _ => false,
        }
    }
}
