use std::fmt;

use serde::{Serialize, Serializer};

use crate::imp::{Block, ImpEnv, ImpExpr, ImpType, Index, Loc, Stmt};
use crate::typesys::{RangeId, Type};
use crate::value::CanonValue;
use crate::{Error, Result};

/// A tree of locations holding a structured value.
///
/// In `Array(p, r)` every location of `p` has an array type `b[r]`; element
/// `i` of the array lives in `p` with each `l` replaced by `l[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pattern {
    Unit,
    Loc(Loc),
    Pair(Box<Pattern>, Box<Pattern>),
    Array(Box<Pattern>, RangeId),
}

impl Pattern {
    pub fn pair(a: Pattern, b: Pattern) -> Pattern {
        Pattern::Pair(Box::new(a), Box::new(b))
    }

    /// `locs(p)`, left to right.
    pub fn locs(&self) -> Vec<Loc> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<Loc>) {
        match self {
            Pattern::Unit => {}
            Pattern::Loc(l) => out.push(*l),
            Pattern::Pair(a, b) => {
                a.collect(out);
                b.collect(out);
            }
            Pattern::Array(p, _) => p.collect(out),
        }
    }

    pub fn as_loc(&self) -> Option<Loc> {
        match self {
            Pattern::Loc(l) => Some(*l),
            _ => None,
        }
    }

    /// Element `i` of an array's element pattern.
    pub fn at(&self, i: u32) -> Pattern {
        match self {
            Pattern::Unit => Pattern::Unit,
            Pattern::Loc(l) => Pattern::Loc(l.at(i)),
            Pattern::Pair(a, b) => Pattern::pair(a.at(i), b.at(i)),
            Pattern::Array(..) => unreachable!("arrays do not nest"),
        }
    }

    /// The pattern over unrolled locations: arrays become right-nested tuples.
    pub fn unrolled(&self) -> Pattern {
        match self {
            Pattern::Unit | Pattern::Loc(_) => self.clone(),
            Pattern::Pair(a, b) => Pattern::pair(a.unrolled(), b.unrolled()),
            Pattern::Array(p, r) => {
                let items: Vec<Pattern> = (0..r.size as u32).map(|i| p.at(i)).collect();
                let mut it = items.into_iter().rev();
                let last = it.next().expect("ranges are non-empty");
                it.fold(last, |acc, x| Pattern::pair(x, acc))
            }
        }
    }

    /// `p ∼ p'`: same shape.
    pub fn compatible(&self, other: &Pattern) -> bool {
        match (self, other) {
            (Pattern::Unit, Pattern::Unit) | (Pattern::Loc(_), Pattern::Loc(_)) => true,
            (Pattern::Pair(a, b), Pattern::Pair(c, d)) => a.compatible(c) && b.compatible(d),
            (Pattern::Array(a, r), Pattern::Array(b, q)) => r == q && a.compatible(b),
            _ => false,
        }
    }

    /// `Σ ⊢ p : t`.
    pub fn has_type(&self, env: &[(Loc, ImpType)], t: &Type) -> bool {
        let find = |l: &Loc| env.iter().rev().find(|(k, _)| k == l).map(|(_, t)| *t);
        match (self, t) {
            (Pattern::Unit, Type::Unit) => true,
            (Pattern::Loc(l), Type::Base(b)) => find(l) == Some(ImpType::Base(*b)),
            (Pattern::Pair(a, b), Type::Pair(s, u)) => a.has_type(env, s) && b.has_type(env, u),
            (Pattern::Array(p, r), Type::Array(e, q)) => {
                r == q && p.has_type(&array_view(env, *r), e)
            }
            _ => false,
        }
    }

    /// `V⟦p⟧ s`: the value stored in the pattern's locations.
    pub fn read(&self, s: &crate::value::State<Loc>) -> CanonValue {
        match self {
            Pattern::Unit => CanonValue::Unit,
            Pattern::Loc(l) => s.lookup(l),
            Pattern::Pair(a, b) => CanonValue::pair(a.read(s), b.read(s)),
            Pattern::Array(..) => self.unrolled().read(s),
        }
    }

    /// Bind a value to the pattern's locations by simultaneous descent.
    pub fn flatten(&self, v: &CanonValue, out: &mut Vec<(Loc, CanonValue)>) -> Result<()> {
        match (self, v) {
            (Pattern::Unit, _) => Ok(()),
            (Pattern::Loc(l), v) => {
                out.push((*l, v.clone()));
                Ok(())
            }
            (Pattern::Pair(a, b), CanonValue::Pair(x, y)) => {
                a.flatten(x, out)?;
                b.flatten(y, out)
            }
            (Pattern::Array(..), v) => self.unrolled().flatten(v, out),
            (p, v) => Err(Error::Internal(format!("value {v} does not fit pattern {p}"))),
        }
    }
}

// Array locations typed `b[r]` viewed as scalars, for checking element patterns.
fn array_view(env: &[(Loc, ImpType)], r: RangeId) -> ImpEnv {
    env.iter()
        .filter_map(|(l, t)| match t {
            ImpType::Array(b, q) if *q == r => Some((*l, ImpType::Base(*b))),
            _ => None,
        })
        .collect()
}

/// `p ← p'`: componentwise copy. Arrays copy element by element in a loop.
pub fn assign(p: &Pattern, q: &Pattern) -> Result<Block> {
    if !p.compatible(q) {
        return Err(Error::Internal(format!("ShapeError: cannot assign {q} to {p}")));
    }
    let mut out = Block::nil();
    match (p, q) {
        (Pattern::Unit, Pattern::Unit) => {}
        (Pattern::Loc(a), Pattern::Loc(b)) => out.push(Stmt::Assign(*a, ImpExpr::Loc(*b))),
        (Pattern::Pair(a, b), Pattern::Pair(c, d)) => {
            out.append(assign(a, c)?);
            out.append(assign(b, d)?);
        }
        (Pattern::Array(a, r), Pattern::Array(b, _)) => {
            let body = a
                .locs()
                .into_iter()
                .zip(b.locs())
                .map(|(x, y)| Stmt::AssignAt(x, Index::Range(*r), ImpExpr::Elem(y, Index::Range(*r))))
                .collect();
            if !a.locs().is_empty() {
                out.push(Stmt::For(*r, Block(body)));
            }
        }
        _ => unreachable!("compatibility checked above"),
    }
    Ok(out)
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Unit => write!(f, "()"),
            Pattern::Loc(l) => write!(f, "{l}"),
            Pattern::Pair(a, b) => write!(f, "({a}, {b})"),
            Pattern::Array(p, r) => write!(f, "{p}[{r}]"),
        }
    }
}

impl Serialize for Pattern {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
