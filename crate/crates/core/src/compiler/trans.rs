use std::collections::BTreeMap;

use crate::ast::{Expr, ExprKind, Side, Value};
use crate::compiler::layout::Layout;
use crate::compiler::pattern::{assign, Pattern};
use crate::imp::{Block, ImpExpr, ImpType, Index, Loc, Stmt};
use crate::typesys::{BaseType, RangeId, Type, TypeEnv};
use crate::value::CanonValue;
use crate::{Error, Result};

/// Allocates locations in rule-application order and remembers their types.
#[derive(Debug, Default)]
pub struct Translator {
    next: u32,
    pub types: BTreeMap<Loc, ImpType>,
}

fn internal<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Internal(msg.into()))
}

fn typed(e: &Expr) -> Result<&Type> {
    e.ty.as_ref().ok_or_else(|| Error::Internal("translation needs a type-checked term".into()))
}

impl Translator {
    pub fn new() -> Self {
        Self::default()
    }

    fn loc(&mut self, t: ImpType) -> Loc {
        let l = Loc::new(self.next);
        self.next += 1;
        self.types.insert(l, t);
        l
    }

    /// A fresh pattern of type `t`.
    pub fn fresh(&mut self, t: &Type) -> Result<Pattern> {
        self.fresh_in(t, None)
    }

    fn fresh_in(&mut self, t: &Type, range: Option<RangeId>) -> Result<Pattern> {
        Ok(match t {
            Type::Unit => Pattern::Unit,
            Type::Base(b) => Pattern::Loc(self.loc(match range {
                None => ImpType::Base(*b),
                Some(r) => ImpType::Array(*b, r),
            })),
            Type::Pair(a, b) => Pattern::pair(self.fresh_in(a, range)?, self.fresh_in(b, range)?),
            Type::Array(e, r) => match range {
                None => Pattern::Array(Box::new(self.fresh_in(e, Some(*r))?), *r),
                Some(_) => return internal("nested array type"),
            },
        })
    }

    /// `locs(C)` with their types, for wrapping in `local`.
    fn decls(&self, locs: impl IntoIterator<Item = Loc>) -> Vec<(Loc, ImpType)> {
        locs.into_iter().map(|l| (l, self.types[&l])).collect()
    }

    fn wrap_local(&self, c: Block, hide: Vec<Loc>) -> Block {
        if hide.is_empty() {
            c
        } else {
            Block::one(Stmt::Local(self.decls(hide), c))
        }
    }

    fn value(&mut self, rho: &Layout, v: &Value) -> Result<(Block, Pattern)> {
        Ok(match v {
            Value::Var(x) => match rho.get(x) {
                Some(p) => (Block::nil(), p.clone()),
                None => return internal(format!("`{x}` has no layout")),
            },
            Value::Const(CanonValue::Unit) => (Block::nil(), Pattern::Unit),
            Value::Const(c) => {
                let b = BaseType::of_value(c).ok_or_else(|| Error::Internal(format!("constant {c} is not a base value")))?;
                let l = self.loc(ImpType::Base(b));
                (Block::one(Stmt::Assign(l, ImpExpr::Const(c.clone()))), Pattern::Loc(l))
            }
            Value::Pair(a, b) => {
                let (mut c1, p1) = self.value(rho, a)?;
                let (c2, p2) = self.value(rho, b)?;
                c1.append(c2);
                (c1, Pattern::pair(p1, p2))
            }
        })
    }

    fn value_loc(&mut self, rho: &Layout, v: &Value) -> Result<(Block, Loc)> {
        let (c, p) = self.value(rho, v)?;
        match p.as_loc() {
            Some(l) => Ok((c, l)),
            None => internal(format!("{v} is not held in a single location")),
        }
    }

    /// `ρ ⊢ M ⇒ C, p`.
    pub fn translate(&mut self, rho: &Layout, e: &Expr) -> Result<(Block, Pattern)> {
        Ok(match &e.kind {
            ExprKind::Value(v) => self.value(rho, v)?,
            ExprKind::Op(op, a, b) => {
                let (mut c, la) = self.value_loc(rho, a)?;
                let (c2, lb) = self.value_loc(rho, b)?;
                c.append(c2);
                let t = typed(e)?.as_base().ok_or_else(|| Error::Internal("operator result is not a base type".into()))?;
                let l = self.loc(ImpType::Base(t));
                c.push(Stmt::Assign(l, ImpExpr::Op(*op, la, lb)));
                (c, Pattern::Loc(l))
            }
            ExprKind::Proj(side, v) => {
                let (c, p) = self.value(rho, v)?;
                match (side, p) {
                    (Side::Fst, Pattern::Pair(p1, _)) => (c, *p1),
                    (Side::Snd, Pattern::Pair(_, p2)) => (c, *p2),
                    (_, p) => return internal(format!("projection from non-pair pattern {p}")),
                }
            }
            ExprKind::If(v, m, n) => {
                let (mut c, l) = self.value_loc(rho, v)?;
                let target = self.fresh(typed(e)?)?;
                let branch = |this: &mut Self, body: &Expr| -> Result<Block> {
                    let (ci, pi) = this.translate(rho, body)?;
                    let hide = ci.yields();
                    let mut inner = ci;
                    inner.append(assign(&target, &pi)?);
                    Ok(this.wrap_local(inner, hide))
                };
                let c1 = branch(self, m)?;
                let c2 = branch(self, n)?;
                c.push(Stmt::If(l, c1, c2));
                (c, target)
            }
            ExprKind::Observe(v, b) => {
                let (mut c, l) = self.value_loc(rho, v)?;
                let b = b.ok_or_else(|| Error::Internal("observe without a base type".into()))?;
                c.push(Stmt::Observe(b, l));
                (c, Pattern::Unit)
            }
            ExprKind::Random(d, v) => {
                let (mut c, p) = self.value(rho, v)?;
                let l = self.loc(ImpType::Base(d.result_type()));
                c.push(Stmt::Random(l, *d, p.locs()));
                (c, Pattern::Loc(l))
            }
            ExprKind::Let(x, m, n) => {
                let (c1, p1) = self.translate(rho, m)?;
                let keep = p1.locs();
                let hide: Vec<Loc> = c1.yields().into_iter().filter(|l| !keep.contains(l)).collect();
                let mut inner = rho.clone();
                inner.insert(x.clone(), p1);
                let (c2, p2) = self.translate(&inner, n)?;
                let mut c = self.wrap_local(c1, hide);
                c.append(c2);
                (c, p2)
            }
            ExprKind::Array(vs) => {
                let mut c = Block::nil();
                let mut parts = Vec::new();
                for v in vs {
                    let (ci, pi) = self.value(rho, v)?;
                    c.append(ci);
                    parts.push(pi);
                }
                let target = self.fresh(typed(e)?)?;
                let Pattern::Array(elem, _) = &target else { return internal("array literal without array type") };
                for (i, p) in parts.iter().enumerate() {
                    for (dst, src) in elem.locs().into_iter().zip(p.locs()) {
                        c.push(Stmt::AssignAt(dst, Index::Const(i as u32), ImpExpr::Loc(src)));
                    }
                }
                (c, target)
            }
            ExprKind::Index(a, i, _) => {
                let (mut c, pa) = self.value(rho, a)?;
                let (ci, li) = self.value_loc(rho, i)?;
                c.append(ci);
                let Pattern::Array(elem, _) = pa else { return internal("indexing a non-array pattern") };
                let q = self.fresh(typed(e)?)?;
                for (dst, src) in q.locs().into_iter().zip(elem.locs()) {
                    c.push(Stmt::Assign(dst, ImpExpr::Elem(src, Index::Loc(li))));
                }
                (c, q)
            }
            ExprKind::For(x, z, m, _) => {
                let (mut c, pz) = self.value(rho, z)?;
                let Pattern::Array(elem, r) = pz else { return internal("iterating over a non-array pattern") };
                let source_elem_ty = pattern_type(&elem, &self.types)?;
                let q = self.fresh(&source_elem_ty)?;
                let mut inner = rho.clone();
                inner.insert(x.clone(), q.clone());
                let (cb, pb) = self.translate(&inner, m)?;
                let out = self.fresh(typed(e)?)?;
                let Pattern::Array(out_elem, _) = &out else { return internal("comprehension without array type") };
                let mut body = Block::nil();
                for (dst, src) in q.locs().into_iter().zip(elem.locs()) {
                    body.push(Stmt::Assign(dst, ImpExpr::Elem(src, Index::Range(r))));
                }
                let mut hide = q.locs();
                hide.extend(cb.yields());
                body.append(cb);
                for (dst, src) in out_elem.locs().into_iter().zip(pb.locs()) {
                    body.push(Stmt::AssignAt(dst, Index::Range(r), ImpExpr::Loc(src)));
                }
                c.push(Stmt::For(r, self.wrap_local(body, hide)));
                (c, out)
            }
        })
    }
}

/// The element type held by an array's element pattern.
fn pattern_type(p: &Pattern, types: &BTreeMap<Loc, ImpType>) -> Result<Type> {
    Ok(match p {
        Pattern::Unit => Type::Unit,
        Pattern::Loc(l) => match types.get(l) {
            Some(t) => Type::Base(t.base()),
            None => return internal(format!("untyped location {l}")),
        },
        Pattern::Pair(a, b) => Type::pair(pattern_type(a, types)?, pattern_type(b, types)?),
        Pattern::Array(..) => return internal("nested array pattern"),
    })
}

/// Allocate a layout for `Γ`, returning it with the input environment `Σ`.
pub fn layout_for(tr: &mut Translator, gamma: &TypeEnv) -> Result<(Layout, Vec<(Loc, ImpType)>)> {
    let mut rho = Layout::new();
    let mut sigma = Vec::new();
    for (x, t) in gamma.iter() {
        let p = tr.fresh(t)?;
        for l in p.locs() {
            sigma.push((l, tr.types[&l]));
        }
        rho.insert(x.clone(), p);
    }
    Ok((rho, sigma))
}
