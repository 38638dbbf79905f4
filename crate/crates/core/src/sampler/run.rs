use std::collections::HashMap;

use rand::Rng;

use crate::ast::{BinOp, Dist, Expr, ExprKind, Name, Side, Value};
use crate::ops::{apply, Params};
use crate::sampler::dist::{density_of, sample_of};
use crate::sampler::observe::{observe_rewrite, Annotated};
use crate::typesys::BaseType;
use crate::value::CanonValue;
use crate::{Error, Result};

#[derive(Clone, Debug)]
enum Atom {
    Const(CanonValue),
    Slot(usize),
    Pair(Box<Atom>, Box<Atom>),
}

#[derive(Clone, Debug)]
enum Node {
    Atom(Atom),
    Op(BinOp, Atom, Atom),
    Proj(Side, Atom),
    If(Atom, Box<Node>, Box<Node>),
    Let(usize, Box<Node>, Box<Node>),
    Random(Dist, Atom),
    /// A draw fixed at its observed point and weighted by the density there.
    Pivot { dist: Dist, params: Atom, at: Option<Atom> },
    Observe(Atom),
    /// An observation accounted for by its pivot draw.
    Settled,
}

/// A program prepared for weighted sampling: slots instead of names, and
/// supported real observations folded into their pivot draws.
#[derive(Clone, Debug)]
pub struct Sampler {
    root: Node,
    slots: usize,
    pub annotated: Annotated,
}

/// One likelihood-weighted run.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSample {
    pub value: CanonValue,
    pub weight: f64,
}

impl Sampler {
    /// Fails with the first unsupported real observation.
    pub fn new(e: &Expr) -> Result<Sampler> {
        let annotated = observe_rewrite(e);
        if let Some((span, reason)) = annotated.first_unsupported() {
            return Err(Error::UnsupportedObserve { message: reason.to_string(), span: *span });
        }
        let mut b = Builder { slots: HashMap::new(), next: 0, ann: &annotated };
        let root = b.node(e)?;
        let slots = b.next;
        Ok(Sampler { root, slots, annotated })
    }

    /// `run_weighted`: evaluate once, drawing from `rng`.
    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<WeightedSample> {
        let mut env = vec![CanonValue::Unit; self.slots];
        let mut weight = 1.0;
        let value = eval(&self.root, &mut env, rng, &mut weight)?;
        Ok(WeightedSample { value, weight })
    }
}

struct Builder<'a> {
    slots: HashMap<Name, usize>,
    next: usize,
    ann: &'a Annotated,
}

impl Builder<'_> {
    fn atom(&self, v: &Value) -> Result<Atom> {
        Ok(match v {
            Value::Const(c) => Atom::Const(c.clone()),
            Value::Var(x) => Atom::Slot(*self.slots.get(x).ok_or_else(|| Error::Undefined(x.to_string()))?),
            Value::Pair(a, b) => Atom::Pair(Box::new(self.atom(a)?), Box::new(self.atom(b)?)),
        })
    }

    fn bind(&mut self, x: &Name) -> usize {
        let i = self.next;
        self.next += 1;
        self.slots.insert(x.clone(), i);
        i
    }

    fn node(&mut self, e: &Expr) -> Result<Node> {
        Ok(match &e.kind {
            ExprKind::Value(v) => Node::Atom(self.atom(v)?),
            ExprKind::Op(op, a, b) => Node::Op(*op, self.atom(a)?, self.atom(b)?),
            ExprKind::Proj(s, v) => Node::Proj(*s, self.atom(v)?),
            ExprKind::If(c, m, n) => Node::If(self.atom(c)?, Box::new(self.node(m)?), Box::new(self.node(n)?)),
            ExprKind::Let(x, m, n) => {
                let bound = match (&m.kind, self.ann.pivots.get(x)) {
                    (ExprKind::Random(d, v), Some(at)) => Node::Pivot {
                        dist: *d,
                        params: self.atom(v)?,
                        at: at.as_ref().map(|a| self.atom(a)).transpose()?,
                    },
                    _ => self.node(m)?,
                };
                let slot = self.bind(x);
                Node::Let(slot, Box::new(bound), Box::new(self.node(n)?))
            }
            ExprKind::Random(d, v) => Node::Random(*d, self.atom(v)?),
            ExprKind::Observe(_, _) if self.ann.pivot_observes.contains(&(e as *const Expr as usize)) => Node::Settled,
            ExprKind::Observe(v, b) => {
                if *b == Some(BaseType::Real) {
                    return Err(Error::UnsupportedObserve { message: "real observation without a pivot draw".into(), span: e.span });
                }
                Node::Observe(self.atom(v)?)
            }
            ExprKind::Array(_) | ExprKind::Index(..) | ExprKind::For(..) => {
                return Err(Error::Internal("the sampler runs on array-free programs".into()))
            }
        })
    }
}

fn value(a: &Atom, env: &[CanonValue]) -> CanonValue {
    match a {
        Atom::Const(c) => c.clone(),
        Atom::Slot(i) => env[*i].clone(),
        Atom::Pair(a, b) => CanonValue::pair(value(a, env), value(b, env)),
    }
}

fn eval<R: Rng + ?Sized>(n: &Node, env: &mut Vec<CanonValue>, rng: &mut R, w: &mut f64) -> Result<CanonValue> {
    let mut n = n;
    loop {
        return Ok(match n {
            Node::Atom(a) => value(a, env),
            Node::Op(op, a, b) => apply(*op, &value(a, env), &value(b, env))?,
            Node::Proj(s, a) => {
                let v = value(a, env);
                let part = match s {
                    Side::Fst => v.fst(),
                    Side::Snd => v.snd(),
                };
                part.cloned().ok_or_else(|| Error::Internal(format!("projection of non-pair {v}")))?
            }
            Node::If(c, a, b) => {
                let c = value(c, env);
                match c.as_bool() {
                    Some(true) => eval(a, env, rng, w)?,
                    Some(false) => eval(b, env, rng, w)?,
                    None => return Err(Error::Internal(format!("condition {c} is not a boolean"))),
                }
            }
            Node::Let(slot, m, body) => {
                env[*slot] = eval(m, env, rng, w)?;
                n = body;
                continue;
            }
            Node::Random(d, a) => sample_of(&Params::decode(*d, &value(a, env))?, rng),
            Node::Pivot { dist, params, at } => {
                let p = Params::decode(*dist, &value(params, env))?;
                let x = at.as_ref().map_or(CanonValue::Real(0.0), |a| value(a, env));
                *w *= density_of(&p, &x);
                x
            }
            Node::Observe(a) => {
                if !value(a, env).is_zero() {
                    *w = 0.0;
                }
                CanonValue::Unit
            }
            Node::Settled => CanonValue::Unit,
        });
    }
}
