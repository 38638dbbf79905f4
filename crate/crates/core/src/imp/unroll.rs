use std::collections::{BTreeMap, HashMap};

use crate::ast::BinOp;
use crate::imp::syntax::{Block, ImpExpr, ImpType, Index, Loc, Stmt};
use crate::typesys::{BaseType, RangeId};
use crate::value::CanonValue;
use crate::{Error, Result};

/// Expand loops, array locations and array subscripts into core Imp.
///
/// `types` gives the type of every array location that is not declared by
/// a `local` inside `c` (inputs and escaping results). Loop iteration `i`
/// renames the loop body's locals `l` to `l[i]`; array `l` of size `n`
/// becomes the scalars `l[0] .. l[n-1]`.
pub fn unroll_imp(c: &Block, types: &BTreeMap<Loc, ImpType>) -> Result<Block> {
    let mut sizes: HashMap<Loc, u32> = HashMap::new();
    for (l, t) in types {
        if let ImpType::Array(_, r) = t {
            sizes.insert(*l, r.size as u32);
        }
    }
    let next = c.max_id().map_or(0, |m| m + 1).max(types.keys().map(|l| l.id + 1).max().unwrap_or(0));
    Unroller { sizes, next }.block(c)
}

struct Unroller {
    sizes: HashMap<Loc, u32>,
    next: u32,
}

fn at(l: Loc, i: u32) -> Result<Loc> {
    if l.inst.is_some() {
        return Err(Error::Internal(format!("{l} is already an element")));
    }
    Ok(l.at(i))
}

fn const_index(i: &Index) -> Result<u32> {
    match i {
        Index::Const(k) => Ok(*k),
        other => Err(Error::Internal(format!("subscript {other} outside its loop"))),
    }
}

impl Unroller {
    fn fresh(&mut self) -> Loc {
        let l = Loc::new(self.next);
        self.next += 1;
        l
    }

    fn block(&mut self, c: &Block) -> Result<Block> {
        let mut out = Block::nil();
        for s in &c.0 {
            self.stmt(s, &mut out)?;
        }
        Ok(out)
    }

    fn stmt(&mut self, s: &Stmt, out: &mut Block) -> Result<()> {
        match s {
            Stmt::Assign(l, ImpExpr::Elem(a, Index::Loc(i))) => out.append(self.dynamic_read(*l, *a, *i)?),
            Stmt::Assign(l, e) => out.push(Stmt::Assign(*l, self.expr(e)?)),
            Stmt::AssignAt(l, i, e) => out.push(Stmt::Assign(at(*l, const_index(i)?)?, self.expr(e)?)),
            Stmt::Random(..) | Stmt::Observe(..) => out.push(s.clone()),
            Stmt::If(l, a, b) => out.push(Stmt::If(*l, self.block(a)?, self.block(b)?)),
            Stmt::Local(ls, body) => {
                let mut decls = Vec::new();
                for (l, t) in ls {
                    match t {
                        ImpType::Base(_) => decls.push((*l, *t)),
                        ImpType::Array(b, r) => {
                            self.sizes.insert(*l, r.size as u32);
                            for i in 0..r.size as u32 {
                                decls.push((at(*l, i)?, ImpType::Base(*b)));
                            }
                        }
                    }
                }
                out.push(Stmt::Local(decls, self.block(body)?));
            }
            Stmt::For(r, body) => {
                let mut locals = Vec::new();
                loop_locals(body, &mut locals);
                for i in 0..r.size as u32 {
                    let inst = instantiate(body, *r, i, &locals)?;
                    out.append(self.block(&inst)?);
                }
            }
        }
        Ok(())
    }

    fn expr(&self, e: &ImpExpr) -> Result<ImpExpr> {
        Ok(match e {
            ImpExpr::Elem(a, i) => ImpExpr::Loc(at(*a, const_index(i)?)?),
            other => other.clone(),
        })
    }

    /// `l <- a[i]` with `i` held in a location: normalize the subscript into
    /// `[0, n)` and select the element by a chain of equality tests.
    fn dynamic_read(&mut self, l: Loc, a: Loc, i: Loc) -> Result<Block> {
        let n = *self.sizes.get(&a).ok_or_else(|| Error::Internal(format!("size of array {a} is unknown")))?;
        if n == 1 {
            return Ok(Block::one(Stmt::Assign(l, ImpExpr::Loc(at(a, 0)?))));
        }
        let int = ImpType::Base(BaseType::Int);
        let (tn, t1, t2, idx) = (self.fresh(), self.fresh(), self.fresh(), self.fresh());
        let mut body = Block(vec![
            Stmt::Assign(tn, ImpExpr::Const(CanonValue::Int(n as i64))),
            Stmt::Assign(t1, ImpExpr::Op(BinOp::Mod, i, tn)),
            Stmt::Assign(t2, ImpExpr::Op(BinOp::Add, t1, tn)),
            Stmt::Assign(idx, ImpExpr::Op(BinOp::Mod, t2, tn)),
        ]);
        body.append(self.chain(l, a, idx, 0, n)?);
        Ok(Block::one(Stmt::Local(vec![(tn, int), (t1, int), (t2, int), (idx, int)], body)))
    }

    fn chain(&mut self, l: Loc, a: Loc, idx: Loc, k: u32, n: u32) -> Result<Block> {
        let take = Block::one(Stmt::Assign(l, ImpExpr::Loc(at(a, k)?)));
        if k + 1 == n {
            return Ok(take);
        }
        let (c, e) = (self.fresh(), self.fresh());
        let rest = self.chain(l, a, idx, k + 1, n)?;
        Ok(Block::one(Stmt::Local(
            vec![(c, ImpType::Base(BaseType::Int)), (e, ImpType::Base(BaseType::Bool))],
            Block(vec![
                Stmt::Assign(c, ImpExpr::Const(CanonValue::Int(k as i64))),
                Stmt::Assign(e, ImpExpr::Op(BinOp::Eq, idx, c)),
                Stmt::If(e, take, rest),
            ]),
        )))
    }
}

fn loop_locals(b: &Block, out: &mut Vec<Loc>) {
    for s in &b.0 {
        match s {
            Stmt::Local(ls, body) => {
                out.extend(ls.iter().map(|(l, _)| *l));
                loop_locals(body, out);
            }
            Stmt::If(_, x, y) => {
                loop_locals(x, out);
                loop_locals(y, out);
            }
            _ => {}
        }
    }
}

/// Iteration `i` of a loop body over `r`.
fn instantiate(b: &Block, r: RangeId, i: u32, locals: &[Loc]) -> Result<Block> {
    let loc = |l: &Loc| if locals.contains(l) { l.at(i) } else { *l };
    let index = |x: &Index| match x {
        Index::Range(q) if *q == r => Index::Const(i),
        Index::Loc(l) => Index::Loc(loc(l)),
        other => *other,
    };
    let expr = |e: &ImpExpr| match e {
        ImpExpr::Const(_) => e.clone(),
        ImpExpr::Loc(l) => ImpExpr::Loc(loc(l)),
        ImpExpr::Op(op, a, b) => ImpExpr::Op(*op, loc(a), loc(b)),
        ImpExpr::Elem(a, x) => ImpExpr::Elem(*a, index(x)),
    };
    let mut out = Block::nil();
    for s in &b.0 {
        out.push(match s {
            Stmt::Assign(l, e) => Stmt::Assign(loc(l), expr(e)),
            Stmt::AssignAt(l, x, e) => Stmt::AssignAt(*l, index(x), expr(e)),
            Stmt::Random(l, d, args) => Stmt::Random(loc(l), *d, args.iter().map(loc).collect()),
            Stmt::Observe(t, l) => Stmt::Observe(*t, loc(l)),
            Stmt::If(l, x, y) => Stmt::If(loc(l), instantiate(x, r, i, locals)?, instantiate(y, r, i, locals)?),
            Stmt::Local(ls, body) => {
                for (_, t) in ls {
                    if let ImpType::Array(..) = t {
                        return Err(Error::Internal("array locals inside a loop body".into()));
                    }
                }
                Stmt::Local(ls.iter().map(|(l, t)| (loc(l), *t)).collect(), instantiate(body, r, i, locals)?)
            }
            Stmt::For(..) => return Err(Error::Internal("nested iteration".into())),
        });
    }
    Ok(out)
}
