//! Surface syntax as written, before desugaring, and its printer.

use std::fmt;

use crate::ast::{Side, Span};
use crate::value::CanonValue;

#[derive(Clone, Debug, PartialEq)]
pub enum Pat {
    Var(String),
    Wild,
    Unit,
    Tuple(Vec<Pat>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SurfaceOp {
    And,
    Or,
    Eq,
    /// `==`, an alias of `=`.
    EqEq,
    Gt,
    /// `a < b`, read as `b > a`.
    Lt,
    Add,
    Sub,
    Mul,
    Mod,
}

impl SurfaceOp {
    pub fn symbol(self) -> &'static str {
        match self {
            SurfaceOp::And => "&&",
            SurfaceOp::Or => "||",
            SurfaceOp::Eq => "=",
            SurfaceOp::EqEq => "==",
            SurfaceOp::Gt => ">",
            SurfaceOp::Lt => "<",
            SurfaceOp::Add => "+",
            SurfaceOp::Sub => "-",
            SurfaceOp::Mul => "*",
            SurfaceOp::Mod => "%",
        }
    }

    pub fn from_symbol(s: &str) -> Option<SurfaceOp> {
        Some(match s {
            "&&" => SurfaceOp::And,
            "||" => SurfaceOp::Or,
            "=" => SurfaceOp::Eq,
            "==" => SurfaceOp::EqEq,
            ">" => SurfaceOp::Gt,
            "<" => SurfaceOp::Lt,
            "+" => SurfaceOp::Add,
            "-" => SurfaceOp::Sub,
            "*" => SurfaceOp::Mul,
            "%" => SurfaceOp::Mod,
            _ => return None,
        })
    }

    pub fn is_equality(self) -> bool {
        matches!(self, SurfaceOp::Eq | SurfaceOp::EqEq)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SExpr {
    pub kind: SKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SKind {
    Var(String),
    Const(CanonValue),
    Tuple(Vec<SExpr>),
    Proj(Box<SExpr>, Side),
    Op(SurfaceOp, Box<SExpr>, Box<SExpr>),
    If(Box<SExpr>, Box<SExpr>, Box<SExpr>),
    Let(Pat, Box<SExpr>, Box<SExpr>),
    Random(String, Vec<SExpr>),
    Observe(Box<SExpr>),
    /// `let f p1 .. pn = body in rest`: a call-by-value macro.
    FunDef { name: String, params: Vec<Pat>, body: Box<SExpr>, rest: Box<SExpr> },
    Apply(String, Vec<SExpr>),
    Seq(Box<SExpr>, Box<SExpr>),
    ArrayLit(Vec<SExpr>),
    Index(Box<SExpr>, Box<SExpr>),
    Comprehension(Pat, Box<SExpr>, Box<SExpr>),
}

impl SExpr {
    pub fn new(kind: SKind, span: Span) -> SExpr {
        SExpr { kind, span }
    }

    /// Structural equality ignoring spans.
    pub fn same_shape(&self, other: &SExpr) -> bool {
        self.to_string() == other.to_string()
    }
}

impl fmt::Display for Pat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pat::Var(x) => f.write_str(x),
            Pat::Wild => f.write_str("_"),
            Pat::Unit => f.write_str("()"),
            Pat::Tuple(ps) => {
                write!(f, "(")?;
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
        }
    }
}

// Atoms print without surrounding parentheses; everything else is wrapped
// whenever it appears in an operand position.
fn is_atomic(e: &SExpr) -> bool {
    match &e.kind {
        SKind::Const(c) => !matches!(c, CanonValue::Int(i) if *i < 0) && !matches!(c, CanonValue::Real(r) if r.is_sign_negative()),
        SKind::Var(_)
        | SKind::Tuple(_)
        | SKind::Proj(..)
        | SKind::Op(..)
        | SKind::Random(..)
        | SKind::Seq(..)
        | SKind::ArrayLit(_)
        | SKind::Index(..)
        | SKind::Comprehension(..) => true,
        _ => false,
    }
}

struct Atom<'a>(&'a SExpr);

impl fmt::Display for Atom<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if is_atomic(self.0) {
            write!(f, "{}", self.0)
        } else {
            write!(f, "({})", self.0)
        }
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SKind::Var(x) => f.write_str(x),
            SKind::Const(c) => write!(f, "{c}"),
            SKind::Tuple(es) => {
                write!(f, "(")?;
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, ")")
            }
            SKind::Proj(e, s) => write!(f, "{}.{}", Atom(e), s.index()),
            SKind::Op(op, a, b) => write!(f, "({} {} {})", Atom(a), op.symbol(), Atom(b)),
            SKind::If(c, m, n) => write!(f, "if {c} then {m} else {n}"),
            SKind::Let(p, m, n) => write!(f, "let {p} = {m} in {n}"),
            SKind::Random(d, args) => {
                write!(f, "random ({d}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, "))")
            }
            SKind::Observe(e) => write!(f, "observe {}", Atom(e)),
            SKind::FunDef { name, params, body, rest } => {
                write!(f, "let {name}")?;
                for p in params {
                    write!(f, " {p}")?;
                }
                write!(f, " = {body} in {rest}")
            }
            SKind::Apply(g, args) => {
                write!(f, "{g}")?;
                for a in args {
                    write!(f, " {}", Atom(a))?;
                }
                Ok(())
            }
            SKind::Seq(a, b) => match a.kind {
                SKind::Let(..) | SKind::If(..) | SKind::FunDef { .. } => write!(f, "(({a}); {b})"),
                _ => write!(f, "({a}; {b})"),
            },
            SKind::ArrayLit(es) => {
                write!(f, "[")?;
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{}", Atom(e))?;
                }
                write!(f, "]")
            }
            SKind::Index(a, i) => write!(f, "{}.[{}]", Atom(a), i),
            SKind::Comprehension(p, src, body) => write!(f, "[for {p} in {src} -> {body}]"),
        }
    }
}
