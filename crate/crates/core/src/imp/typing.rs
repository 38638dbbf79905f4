use std::fmt;

use crate::imp::syntax::{Block, ImpEnv, ImpExpr, ImpType, Loc, Stmt};
use crate::typesys::{op_result, BaseType};
use crate::Error;

#[derive(Clone, Debug, PartialEq)]
pub struct ImpTypeError {
    pub rule: &'static str,
    pub message: String,
}

impl fmt::Display for ImpTypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.rule, self.message)
    }
}

impl From<ImpTypeError> for Error {
    fn from(e: ImpTypeError) -> Error {
        Error::ImpType(e.to_string())
    }
}

fn fail<T>(rule: &'static str, message: String) -> Result<T, ImpTypeError> {
    Err(ImpTypeError { rule, message })
}

fn lookup(env: &[(Loc, ImpType)], l: Loc) -> Option<ImpType> {
    env.iter().rev().find(|(k, _)| *k == l).map(|(_, t)| *t)
}

fn base(env: &[(Loc, ImpType)], l: Loc, rule: &'static str) -> Result<BaseType, ImpTypeError> {
    match lookup(env, l) {
        Some(ImpType::Base(b)) => Ok(b),
        Some(t) => fail(rule, format!("{l} has array type {t}")),
        None => fail(rule, format!("{l} is not declared")),
    }
}

fn expr_type(env: &[(Loc, ImpType)], e: &ImpExpr) -> Result<BaseType, ImpTypeError> {
    match e {
        ImpExpr::Const(c) => {
            BaseType::of_value(c).ok_or_else(|| ImpTypeError { rule: "Imp Const", message: format!("{c} is not a base constant") })
        }
        ImpExpr::Loc(l) => base(env, *l, "Imp Loc"),
        ImpExpr::Op(op, a, b) => {
            let (ta, tb) = (base(env, *a, "Imp Op")?, base(env, *b, "Imp Op")?);
            op_result(*op, ta, tb)
                .ok_or_else(|| ImpTypeError { rule: "Imp Op", message: format!("no signature for {} {op} {}", ta.name(), tb.name()) })
        }
        ImpExpr::Elem(..) => fail("Imp Elem", "array reads must be unrolled before type checking".into()),
    }
}

/// `Σ ⊢ C : Σ'` for core Imp. Returns the yield `Σ'` in assignment order.
pub fn typecheck_imp(c: &Block, sigma: &[(Loc, ImpType)]) -> Result<ImpEnv, ImpTypeError> {
    let mut env: ImpEnv = sigma.to_vec();
    let mut out = ImpEnv::new();
    for s in &c.0 {
        let new = stmt(s, &env)?;
        for (l, t) in new {
            env.push((l, t));
            out.push((l, t));
        }
    }
    Ok(out)
}

fn fresh(env: &[(Loc, ImpType)], l: Loc, rule: &'static str) -> Result<(), ImpTypeError> {
    if lookup(env, l).is_some() {
        return fail(rule, format!("{l} is already assigned"));
    }
    Ok(())
}

fn stmt(s: &Stmt, env: &[(Loc, ImpType)]) -> Result<ImpEnv, ImpTypeError> {
    match s {
        Stmt::Assign(l, e) => {
            fresh(env, *l, "Imp Assign")?;
            Ok(vec![(*l, ImpType::Base(expr_type(env, e)?))])
        }
        Stmt::Random(l, d, args) => {
            fresh(env, *l, "Imp Random")?;
            let want = d.param_types();
            if args.len() != want.len() {
                return fail("Imp Random", format!("{d} takes {} arguments, got {}", want.len(), args.len()));
            }
            for (a, w) in args.iter().zip(want) {
                let t = base(env, *a, "Imp Random")?;
                if t != *w {
                    return fail("Imp Random", format!("argument {a} has type {}, expected {}", t.name(), w.name()));
                }
            }
            Ok(vec![(*l, ImpType::Base(d.result_type()))])
        }
        Stmt::Observe(b, l) => {
            let t = base(env, *l, "Imp Observe")?;
            if t != *b {
                return fail("Imp Observe", format!("{l} has type {}, observed at {}", t.name(), b.name()));
            }
            Ok(Vec::new())
        }
        Stmt::If(l, a, b) => {
            if base(env, *l, "Imp If")? != BaseType::Bool {
                return fail("Imp If", format!("condition {l} is not bool"));
            }
            let ya = typecheck_imp(a, env)?;
            let yb = typecheck_imp(b, env)?;
            if ya != yb {
                return fail("Imp If", format!("branches yield {} and {}", show(&ya), show(&yb)));
            }
            Ok(ya)
        }
        Stmt::Local(ls, body) => {
            let mut y = typecheck_imp(body, env)?;
            for (l, t) in ls {
                match y.iter().position(|(k, _)| k == l) {
                    Some(i) if y[i].1 == *t => {
                        y.remove(i);
                    }
                    Some(i) => return fail("Imp Local", format!("{l} declared {t} but assigned {}", y[i].1)),
                    None => return fail("Imp Local", format!("local {l} is never assigned")),
                }
            }
            Ok(y)
        }
        Stmt::AssignAt(..) | Stmt::For(..) => fail("Imp Extended", "arrays and loops must be unrolled before type checking".into()),
    }
}

pub fn show(env: &[(Loc, ImpType)]) -> String {
    let parts: Vec<String> = env.iter().map(|(l, t)| format!("{l}:{t}")).collect();
    format!("({})", parts.join(", "))
}
