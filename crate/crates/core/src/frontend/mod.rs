//! Lexing, parsing and desugaring of surface programs into typed core Fun.

mod desugar;
mod lexer;
mod parser;
mod surface;

use serde_json::{json, Value as Json};
use thiserror::Error;

pub use desugar::{desugar, desugar_open};
pub use lexer::{lex, Tok, Token};
pub use parser::parse;
pub use surface::{Pat, SExpr, SKind, SurfaceOp};

use crate::ast::{Dist, Expr, ExprKind, Fresh, Span, Value};
use crate::typesys::{typecheck, unroll_arrays, BaseType, Type, TypeEnv};
use crate::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FrontendError {
    #[error("lex error at {span}: {message}")]
    Lex { message: String, span: Span },
    #[error("parse error at {span}: expected {}, found {found}", expected.join(" or "))]
    Parse { expected: Vec<String>, found: String, span: Span },
    #[error("error at {span}: {message}")]
    Desugar { message: String, span: Span },
}

/// A checked program: the typed core term and its array-free expansion.
#[derive(Debug, Clone)]
pub struct Program {
    /// Typed core term; may use arrays.
    pub core: Expr,
    pub ty: Type,
    /// Typed, array-free core term.
    pub flat: Expr,
    pub flat_ty: Type,
    /// Name supply, positioned after every name used so far.
    pub fresh: Fresh,
}

/// Parse, desugar, type-check and unroll a closed surface program.
pub fn load(src: &str) -> Result<Program, Error> {
    let surface = parse(src)?;
    let mut fresh = Fresh::new();
    let core = desugar(&surface, &mut fresh)?;
    Program::from_core(core, fresh)
}

impl Program {
    /// Check a closed core term. `fresh` must know every name in `core`.
    pub fn from_core(mut core: Expr, mut fresh: Fresh) -> Result<Program, Error> {
        let ty = typecheck(&mut core, &TypeEnv::new())?;
        let mut flat = unroll_arrays(&core, &mut fresh)?;
        let flat_ty = typecheck(&mut flat, &TypeEnv::new())?;
        debug_assert!(flat.binders_are_fresh());
        Ok(Program { core, ty, flat, flat_ty, fresh })
    }

    /// A program built directly as a core term, reserving its names.
    pub fn from_expr(core: Expr) -> Result<Program, Error> {
        let mut fresh = Fresh::new();
        for b in core.binders().iter().chain(core.free_vars().iter()) {
            fresh.reserve(b);
        }
        Program::from_core(core, fresh)
    }

    /// No continuous draws and no real-valued observations.
    pub fn is_discrete(&self) -> bool {
        fn go(e: &Expr) -> bool {
            match &e.kind {
                ExprKind::Random(d, _) => !d.is_continuous(),
                ExprKind::Observe(_, b) => *b != Some(BaseType::Real),
                ExprKind::If(_, m, n) | ExprKind::Let(_, m, n) => go(m) && go(n),
                ExprKind::For(_, _, m, _) => go(m),
                _ => true,
            }
        }
        go(&self.flat)
    }
}

/// Core terms in surface-like syntax.
pub fn print_core(e: &Expr) -> String {
    let mut s = String::new();
    write_core(e, &mut s);
    s
}

fn dist_args(d: Dist, v: &Value) -> String {
    let n = d.param_types().len();
    let mut parts = Vec::new();
    let mut cur = v;
    for _ in 1..n {
        match cur {
            Value::Pair(a, b) => {
                parts.push(a.to_string());
                cur = b;
            }
            _ => break,
        }
    }
    parts.push(cur.to_string());
    parts.join(", ")
}

fn write_core(e: &Expr, out: &mut String) {
    use std::fmt::Write;
    let nested = |m: &Expr, out: &mut String| {
        if matches!(m.kind, ExprKind::Let(..) | ExprKind::If(..)) {
            out.push('(');
            write_core(m, out);
            out.push(')');
        } else {
            write_core(m, out);
        }
    };
    match &e.kind {
        ExprKind::Value(v) => write!(out, "{v}").unwrap(),
        ExprKind::Op(op, a, b) => write!(out, "{a} {op} {b}").unwrap(),
        ExprKind::Proj(s, v) => write!(out, "{v}.{}", s.index()).unwrap(),
        ExprKind::If(c, m, n) => {
            write!(out, "if {c} then ").unwrap();
            nested(m, out);
            out.push_str(" else ");
            nested(n, out);
        }
        ExprKind::Let(x, m, n) => {
            write!(out, "let {x} = ").unwrap();
            nested(m, out);
            out.push_str(" in ");
            write_core(n, out);
        }
        ExprKind::Random(d, v) => write!(out, "random ({d}({}))", dist_args(*d, v)).unwrap(),
        ExprKind::Observe(v, _) => write!(out, "observe {v}").unwrap(),
        ExprKind::Array(vs) => {
            let items: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
            write!(out, "[{}]", items.join("; ")).unwrap();
        }
        ExprKind::Index(a, i, _) => write!(out, "{a}.[{i}]").unwrap(),
        ExprKind::For(x, v, m, _) => {
            write!(out, "[for {x} in {v} -> ").unwrap();
            write_core(m, out);
            out.push(']');
        }
    }
}

/// Typed core term as JSON: every node carries its kind, type and span.
pub fn core_to_json(e: &Expr) -> Json {
    let ty = e.ty.as_ref().map(|t| t.to_string());
    let span = json!({"line": e.span.line, "col": e.span.col, "start": e.span.start, "end": e.span.end});
    let v = |v: &Value| Json::String(v.to_string());
    let (kind, fields) = match &e.kind {
        ExprKind::Value(x) => ("value", json!({"value": v(x)})),
        ExprKind::Op(op, a, b) => ("op", json!({"op": op.symbol(), "left": v(a), "right": v(b)})),
        ExprKind::Proj(s, x) => ("proj", json!({"index": s.index(), "value": v(x)})),
        ExprKind::If(c, m, n) => ("if", json!({"cond": v(c), "then": core_to_json(m), "else": core_to_json(n)})),
        ExprKind::Let(x, m, n) => ("let", json!({"var": &**x, "bound": core_to_json(m), "body": core_to_json(n)})),
        ExprKind::Random(d, x) => ("random", json!({"dist": d.name(), "params": v(x)})),
        ExprKind::Observe(x, b) => ("observe", json!({"value": v(x), "observed_type": b.map(|b| b.name())})),
        ExprKind::Array(xs) => ("array", json!({"elements": xs.iter().map(v).collect::<Vec<_>>()})),
        ExprKind::Index(a, i, r) => ("index", json!({"array": v(a), "index": v(i), "range": r.map(|r| r.to_string())})),
        ExprKind::For(x, src, m, r) => (
            "for",
            json!({"var": &**x, "source": v(src), "body": core_to_json(m), "range": r.map(|r| r.to_string())}),
        ),
    };
    let mut obj = json!({"kind": kind, "type": ty, "span": span});
    if let (Json::Object(o), Json::Object(f)) = (&mut obj, fields) {
        o.extend(f);
    }
    obj
}
