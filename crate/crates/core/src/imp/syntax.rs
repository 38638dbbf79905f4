use std::fmt;

use serde::{Serialize, Serializer};

use crate::ast::{BinOp, Dist};
use crate::typesys::{BaseType, RangeId};
use crate::value::CanonValue;

/// A storage location. `inst` is set on the scalar copies produced when
/// arrays and loops are unrolled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Loc {
    pub id: u32,
    pub inst: Option<u32>,
}

impl Loc {
    pub fn new(id: u32) -> Loc {
        Loc { id, inst: None }
    }

    pub fn at(self, i: u32) -> Loc {
        Loc { id: self.id, inst: Some(i) }
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.inst {
            None => write!(f, "l{}", self.id),
            Some(i) => write!(f, "l{}[{i}]", self.id),
        }
    }
}

impl Serialize for Loc {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ImpType {
    Base(BaseType),
    Array(BaseType, RangeId),
}

impl ImpType {
    pub fn base(self) -> BaseType {
        match self {
            ImpType::Base(b) | ImpType::Array(b, _) => b,
        }
    }
}

impl fmt::Display for ImpType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImpType::Base(b) => write!(f, "{}", b.name()),
            ImpType::Array(b, r) => write!(f, "{}[{r}]", b.name()),
        }
    }
}

impl Serialize for ImpType {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// An array subscript.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Index {
    /// The loop index of the enclosing `for r`.
    Range(RangeId),
    Const(u32),
    Loc(Loc),
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Range(r) => write!(f, "{r}"),
            Index::Const(i) => write!(f, "{i}"),
            Index::Loc(l) => write!(f, "{l}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ImpExpr {
    Const(CanonValue),
    Loc(Loc),
    Op(BinOp, Loc, Loc),
    /// `l[i]`, reading one element of an array location.
    Elem(Loc, Index),
}

impl fmt::Display for ImpExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImpExpr::Const(c) => write!(f, "{c}"),
            ImpExpr::Loc(l) => write!(f, "{l}"),
            ImpExpr::Op(op, a, b) => write!(f, "{a} {op} {b}"),
            ImpExpr::Elem(l, i) => write!(f, "{l}[{i}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stmt {
    Assign(Loc, ImpExpr),
    /// `l[i] <- E`.
    AssignAt(Loc, Index, ImpExpr),
    Random(Loc, Dist, Vec<Loc>),
    Observe(BaseType, Loc),
    If(Loc, Block, Block),
    Local(Vec<(Loc, ImpType)>, Block),
    For(RangeId, Block),
}

/// A statement sequence; the empty block is `nil`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Block(pub Vec<Stmt>);

impl Block {
    pub fn nil() -> Block {
        Block(Vec::new())
    }

    pub fn one(s: Stmt) -> Block {
        Block(vec![s])
    }

    pub fn push(&mut self, s: Stmt) {
        self.0.push(s);
    }

    pub fn append(&mut self, other: Block) {
        self.0.extend(other.0);
    }

    pub fn is_nil(&self) -> bool {
        self.0.is_empty()
    }

    /// `locs(C)`: locations this block assigns and leaves in scope, in order.
    pub fn yields(&self) -> Vec<Loc> {
        let mut out = Vec::new();
        for s in &self.0 {
            match s {
                Stmt::Assign(l, _) | Stmt::Random(l, _, _) => out.push(*l),
                Stmt::AssignAt(l, _, _) => {
                    if !out.contains(l) {
                        out.push(*l)
                    }
                }
                Stmt::If(_, a, _) => out.extend(a.yields()),
                Stmt::For(_, b) => {
                    for l in b.yields() {
                        if !out.contains(&l) {
                            out.push(l);
                        }
                    }
                }
                Stmt::Local(ls, b) => out.extend(b.yields().into_iter().filter(|l| !ls.iter().any(|(d, _)| d == l))),
                Stmt::Observe(..) => {}
            }
        }
        out
    }

    /// Number of primitive statements (assignments, draws and observations)
    /// plus one per conditional.
    pub fn size(&self) -> usize {
        self.0
            .iter()
            .map(|s| match s {
                Stmt::If(_, a, b) => 1 + a.size() + b.size(),
                Stmt::Local(_, b) | Stmt::For(_, b) => b.size(),
                _ => 1,
            })
            .sum()
    }

    /// Whether the block uses arrays or loops.
    pub fn is_extended(&self) -> bool {
        self.0.iter().any(|s| match s {
            Stmt::AssignAt(..) | Stmt::For(..) => true,
            Stmt::Assign(_, ImpExpr::Elem(..)) => true,
            Stmt::Local(ls, b) => ls.iter().any(|(_, t)| matches!(t, ImpType::Array(..))) || b.is_extended(),
            Stmt::If(_, a, b) => a.is_extended() || b.is_extended(),
            _ => false,
        })
    }

    /// Every location mentioned anywhere, for fresh-id allocation.
    pub fn max_id(&self) -> Option<u32> {
        let mut m: Option<u32> = None;
        let mut see = |l: &Loc| m = Some(m.map_or(l.id, |x| x.max(l.id)));
        fn idx(i: &Index, see: &mut dyn FnMut(&Loc)) {
            if let Index::Loc(l) = i {
                see(l)
            }
        }
        fn expr(e: &ImpExpr, see: &mut dyn FnMut(&Loc)) {
            match e {
                ImpExpr::Const(_) => {}
                ImpExpr::Loc(l) => see(l),
                ImpExpr::Op(_, a, b) => {
                    see(a);
                    see(b)
                }
                ImpExpr::Elem(l, i) => {
                    see(l);
                    idx(i, see)
                }
            }
        }
        fn go(b: &Block, see: &mut dyn FnMut(&Loc)) {
            for s in &b.0 {
                match s {
                    Stmt::Assign(l, e) => {
                        see(l);
                        expr(e, see)
                    }
                    Stmt::AssignAt(l, i, e) => {
                        see(l);
                        idx(i, see);
                        expr(e, see)
                    }
                    Stmt::Random(l, _, ls) => {
                        see(l);
                        ls.iter().for_each(&mut *see)
                    }
                    Stmt::Observe(_, l) => see(l),
                    Stmt::If(l, a, b) => {
                        see(l);
                        go(a, see);
                        go(b, see)
                    }
                    Stmt::Local(ls, b) => {
                        ls.iter().for_each(|(l, _)| see(l));
                        go(b, see)
                    }
                    Stmt::For(_, b) => go(b, see),
                }
            }
        }
        go(self, &mut see);
        m
    }
}

/// Imp environment `Σ`: ordered, pairwise-distinct typed locations.
pub type ImpEnv = Vec<(Loc, ImpType)>;

fn indent(f: &mut fmt::Formatter<'_>, n: usize) -> fmt::Result {
    write!(f, "{:width$}", "", width = 2 * n)
}

impl Block {
    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        for s in &self.0 {
            indent(f, depth)?;
            match s {
                Stmt::Assign(l, e) => writeln!(f, "{l} <- {e}")?,
                Stmt::AssignAt(l, i, e) => writeln!(f, "{l}[{i}] <- {e}")?,
                Stmt::Random(l, d, args) => {
                    let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                    writeln!(f, "{l} <-s {d}({})", args.join(", "))?
                }
                Stmt::Observe(b, l) => writeln!(f, "observe[{}] {l}", b.name())?,
                Stmt::If(l, a, b) => {
                    writeln!(f, "if {l} {{")?;
                    a.fmt_at(f, depth + 1)?;
                    indent(f, depth)?;
                    writeln!(f, "}} else {{")?;
                    b.fmt_at(f, depth + 1)?;
                    indent(f, depth)?;
                    writeln!(f, "}}")?
                }
                Stmt::Local(ls, b) => {
                    let ls: Vec<String> = ls.iter().map(|(l, t)| format!("{l}:{t}")).collect();
                    writeln!(f, "local {} {{", ls.join(", "))?;
                    b.fmt_at(f, depth + 1)?;
                    indent(f, depth)?;
                    writeln!(f, "}}")?
                }
                Stmt::For(r, b) => {
                    writeln!(f, "for {r} {{")?;
                    b.fmt_at(f, depth + 1)?;
                    indent(f, depth)?;
                    writeln!(f, "}}")?
                }
            }
        }
        Ok(())
    }
}

/// One statement per line, nested blocks indented by two spaces.
impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_nil() {
            return writeln!(f, "nil");
        }
        self.fmt_at(f, 0)
    }
}
