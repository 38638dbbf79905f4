//! Surface to core: A-normal form, scope resolution, and macro expansion.
//!
//! Every binder in the output is unique, so later stages never deal with
//! shadowing or capture. Function definitions are call-by-value macros
//! expanded at each application in their defining scope.

use std::rc::Rc;

use crate::ast::{BinOp, Dist, Expr, ExprKind, Fresh, Name, Side, Span, Value};
use crate::frontend::surface::{Pat, SExpr, SKind, SurfaceOp};
use crate::frontend::FrontendError;

#[derive(Clone)]
enum Binding {
    Var(Name),
    Fun(Rc<FunDef>),
}

struct FunDef {
    params: Vec<Pat>,
    body: SExpr,
    env: Env,
}

/// Lexical environment: surface name to core binding, innermost last.
#[derive(Clone, Default)]
struct Env(Vec<(String, Binding)>);

impl Env {
    fn lookup(&self, x: &str) -> Option<&Binding> {
        self.0.iter().rev().find(|(y, _)| y == x).map(|(_, b)| b)
    }

    fn with(&self, x: &str, b: Binding) -> Env {
        let mut e = self.clone();
        e.0.push((x.to_string(), b));
        e
    }
}

pub fn desugar(e: &SExpr, fresh: &mut Fresh) -> Result<Expr, FrontendError> {
    Desugar { fresh }.expr(e, &Env::default())
}

/// Desugar an open term whose free variables are bound outside it.
pub fn desugar_open(e: &SExpr, free: &[Name], fresh: &mut Fresh) -> Result<Expr, FrontendError> {
    let mut env = Env::default();
    for x in free {
        fresh.reserve(x);
        env = env.with(x, Binding::Var(x.clone()));
    }
    Desugar { fresh }.expr(e, &env)
}

/// Temporaries to bind, left to right, and the values standing for the operands.
type Atomized = (Vec<(Name, Expr)>, Vec<Value>);

struct Desugar<'a> {
    fresh: &'a mut Fresh,
}

fn err(span: Span, message: impl Into<String>) -> FrontendError {
    FrontendError::Desugar { message: message.into(), span }
}

fn wrap(bindings: Vec<(Name, Expr)>, body: Expr, span: Span) -> Expr {
    bindings.into_iter().rev().fold(body, |acc, (x, m)| Expr::let_(x, m, acc, span))
}

impl Desugar<'_> {
    /// The core value of a surface expression that is already a value.
    fn as_value(&self, e: &SExpr, env: &Env) -> Result<Option<Value>, FrontendError> {
        Ok(match &e.kind {
            SKind::Var(x) => match env.lookup(x) {
                Some(Binding::Var(n)) => Some(Value::Var(n.clone())),
                Some(Binding::Fun(_)) => return Err(err(e.span, format!("function `{x}` used as a value"))),
                None => return Err(err(e.span, format!("unbound variable `{x}`"))),
            },
            SKind::Const(c) => Some(Value::Const(c.clone())),
            SKind::Tuple(es) => {
                let mut vs = Vec::new();
                for x in es {
                    match self.as_value(x, env)? {
                        Some(v) => vs.push(v),
                        None => return Ok(None),
                    }
                }
                Some(Value::tuple(vs))
            }
            _ => None,
        })
    }

    /// Values for `es`: used directly when all are values, otherwise every
    /// operand is let-bound to a fresh temporary, left to right.
    fn atomize(&mut self, es: &[&SExpr], env: &Env) -> Result<Atomized, FrontendError> {
        let mut direct = Vec::new();
        for e in es {
            match self.as_value(e, env)? {
                Some(v) => direct.push(v),
                None => break,
            }
        }
        if direct.len() == es.len() {
            return Ok((Vec::new(), direct));
        }
        let mut binds = Vec::new();
        let mut vals = Vec::new();
        for e in es {
            let m = self.expr(e, env)?;
            let t = self.fresh.tmp();
            vals.push(Value::Var(t.clone()));
            binds.push((t, m));
        }
        Ok((binds, vals))
    }

    fn expr(&mut self, e: &SExpr, env: &Env) -> Result<Expr, FrontendError> {
        let sp = e.span;
        let node = |k: ExprKind| Expr::new(k, sp);
        Ok(match &e.kind {
            SKind::Var(_) | SKind::Const(_) => {
                node(ExprKind::Value(self.as_value(e, env)?.expect("variables and constants are values")))
            }
            SKind::Tuple(es) => {
                let refs: Vec<&SExpr> = es.iter().collect();
                let (binds, vals) = self.atomize(&refs, env)?;
                wrap(binds, node(ExprKind::Value(Value::tuple(vals))), sp)
            }
            SKind::Proj(a, side) => {
                let (binds, vals) = self.atomize(&[a], env)?;
                wrap(binds, node(ExprKind::Proj(*side, vals[0].clone())), sp)
            }
            SKind::Op(op, a, b) => {
                let (binds, vals) = self.atomize(&[a, b], env)?;
                let (x, y) = (vals[0].clone(), vals[1].clone());
                let k = match op {
                    SurfaceOp::Lt => ExprKind::Op(BinOp::Gt, y, x),
                    SurfaceOp::EqEq | SurfaceOp::Eq => ExprKind::Op(BinOp::Eq, x, y),
                    other => ExprKind::Op(BinOp::from_symbol(other.symbol()).expect("binary operator"), x, y),
                };
                wrap(binds, node(k), sp)
            }
            SKind::If(c, m, n) => {
                let (binds, vals) = self.atomize(&[c], env)?;
                let m = self.expr(m, env)?;
                let n = self.expr(n, env)?;
                wrap(binds, node(ExprKind::If(vals[0].clone(), Box::new(m), Box::new(n))), sp)
            }
            SKind::Let(p, m, n) => {
                let m = self.expr(m, env)?;
                let mut binds = Vec::new();
                let env2 = self.bind_pattern(p, m, env, &mut binds, sp);
                let body = self.expr(n, &env2)?;
                wrap(binds, body, sp)
            }
            SKind::Random(d, args) => {
                let dist = Dist::from_name(d).ok_or_else(|| err(sp, format!("unknown distribution `{d}`")))?;
                let want = dist.param_types().len();
                if args.len() != want {
                    return Err(err(sp, format!("{dist} takes {want} parameter(s), got {}", args.len())));
                }
                let refs: Vec<&SExpr> = args.iter().collect();
                let (binds, vals) = self.atomize(&refs, env)?;
                wrap(binds, node(ExprKind::Random(dist, Value::tuple(vals))), sp)
            }
            SKind::Observe(a) => {
                if let SKind::Op(op, l, r) = &a.kind {
                    if op.is_equality() {
                        let (mut binds, vals) = self.atomize(&[l, r], env)?;
                        let t = self.fresh.tmp();
                        binds.push((t.clone(), Expr::new(ExprKind::Op(BinOp::ObsEq, vals[0].clone(), vals[1].clone()), a.span)));
                        return Ok(wrap(binds, node(ExprKind::Observe(Value::Var(t), None)), sp));
                    }
                }
                let (binds, vals) = self.atomize(&[a], env)?;
                wrap(binds, node(ExprKind::Observe(vals[0].clone(), None)), sp)
            }
            SKind::FunDef { name, params, body, rest } => {
                if params.is_empty() {
                    return Err(err(sp, format!("function `{name}` needs at least one parameter")));
                }
                let def = FunDef { params: params.clone(), body: (**body).clone(), env: env.clone() };
                let env2 = env.with(name, Binding::Fun(Rc::new(def)));
                self.expr(rest, &env2)?
            }
            SKind::Apply(f, args) => {
                let def = match env.lookup(f) {
                    Some(Binding::Fun(d)) => d.clone(),
                    Some(Binding::Var(_)) => return Err(err(sp, format!("`{f}` is not a function"))),
                    None => return Err(err(sp, format!("unbound function `{f}`"))),
                };
                if def.params.len() != args.len() {
                    return Err(err(
                        sp,
                        format!("`{f}` expects {} argument(s), got {}", def.params.len(), args.len()),
                    ));
                }
                let mut binds = Vec::new();
                let mut callee_env = def.env.clone();
                for (p, a) in def.params.iter().zip(args) {
                    let m = self.expr(a, env)?;
                    callee_env = self.bind_pattern(p, m, &callee_env, &mut binds, sp);
                }
                let body = self.expr(&def.body, &callee_env)?;
                wrap(binds, body, sp)
            }
            SKind::Seq(a, b) => {
                let m = self.expr(a, env)?;
                let t = self.fresh.tmp();
                let n = self.expr(b, env)?;
                Expr::let_(t, m, n, sp)
            }
            SKind::ArrayLit(es) => {
                let refs: Vec<&SExpr> = es.iter().collect();
                let (binds, vals) = self.atomize(&refs, env)?;
                wrap(binds, node(ExprKind::Array(vals)), sp)
            }
            SKind::Index(a, i) => {
                let (binds, vals) = self.atomize(&[a, i], env)?;
                wrap(binds, node(ExprKind::Index(vals[0].clone(), vals[1].clone(), None)), sp)
            }
            SKind::Comprehension(p, src, body) => {
                let (binds, vals) = self.atomize(&[src], env)?;
                let (x, env2, inner) = match p {
                    Pat::Var(x) => {
                        let n = self.fresh.like(x);
                        (n.clone(), env.with(x, Binding::Var(n)), Vec::new())
                    }
                    Pat::Tuple(ps) => {
                        let t = self.fresh.tmp();
                        let mut inner = Vec::new();
                        let env2 = self.destructure(ps, Value::Var(t.clone()), env, &mut inner, sp);
                        (t, env2, inner)
                    }
                    Pat::Wild | Pat::Unit => (self.fresh.tmp(), env.clone(), Vec::new()),
                };
                let b = self.expr(body, &env2)?;
                let b = wrap(inner, b, sp);
                wrap(binds, node(ExprKind::For(x, vals[0].clone(), Box::new(b), None)), sp)
            }
        })
    }

    /// Bind `m` to pattern `p`, pushing the generated lets onto `out`.
    fn bind_pattern(&mut self, p: &Pat, m: Expr, env: &Env, out: &mut Vec<(Name, Expr)>, sp: Span) -> Env {
        match p {
            Pat::Var(x) => {
                let n = self.fresh.like(x);
                out.push((n.clone(), m));
                env.with(x, Binding::Var(n))
            }
            Pat::Wild | Pat::Unit => {
                out.push((self.fresh.tmp(), m));
                env.clone()
            }
            Pat::Tuple(ps) => {
                let t = self.fresh.tmp();
                out.push((t.clone(), m));
                self.destructure(ps, Value::Var(t), env, out, sp)
            }
        }
    }

    fn destructure(&mut self, ps: &[Pat], src: Value, env: &Env, out: &mut Vec<(Name, Expr)>, sp: Span) -> Env {
        let proj = |s, v: &Value| Expr::new(ExprKind::Proj(s, v.clone()), sp);
        let env = self.bind_pattern(&ps[0], proj(Side::Fst, &src), env, out, sp);
        if ps.len() == 2 {
            return self.bind_pattern(&ps[1], proj(Side::Snd, &src), &env, out, sp);
        }
        let r = self.fresh.tmp();
        out.push((r.clone(), proj(Side::Snd, &src)));
        self.destructure(&ps[1..], Value::Var(r), &env, out, sp)
    }
}
