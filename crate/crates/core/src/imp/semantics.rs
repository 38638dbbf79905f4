use crate::imp::syntax::{Block, ImpExpr, Loc, Stmt};
use crate::measure::{dist_measure, Transformer};
use crate::ops::apply;
use crate::value::{CanonValue, State};
use crate::{Error, Result};

pub type ImpState = State<Loc>;

/// `impdt⟦C⟧ : S_Σ ⤳ S_{Σ,Σ'}`.
pub type ImpTransformer = Transformer<ImpState, ImpState>;

pub fn eval_expr(e: &ImpExpr, s: &ImpState) -> Result<CanonValue> {
    Ok(match e {
        ImpExpr::Const(c) => c.clone(),
        ImpExpr::Loc(l) => s.lookup(l),
        ImpExpr::Op(op, a, b) => apply(*op, &s.lookup(a), &s.lookup(b))?,
        ImpExpr::Elem(..) => return Err(Error::Internal("array reads must be unrolled before evaluation".into())),
    })
}

/// Build the transformer of a core Imp block.
pub fn transform_imp(c: &Block) -> Result<ImpTransformer> {
    let mut t = Transformer::identity();
    for s in &c.0 {
        t = t.then(stmt(s)?);
    }
    Ok(t)
}

fn stmt(s: &Stmt) -> Result<ImpTransformer> {
    Ok(match s {
        Stmt::Assign(l, e) => {
            let (l, e) = (*l, e.clone());
            Transformer::pure(move |s: &ImpState| Ok(s.add(l, eval_expr(&e, s)?)))
        }
        Stmt::Random(l, d, args) => {
            let (l, d, args) = (*l, *d, args.clone());
            Transformer::extend(move |s: &ImpState| {
                dist_measure(d, &CanonValue::tuple(args.iter().map(|a| s.lookup(a)).collect()))
            })
            .then(Transformer::pure(move |(s, c): &(ImpState, CanonValue)| Ok(s.add(l, c.clone()))))
        }
        Stmt::Observe(b, l) => {
            let l = *l;
            Transformer::constrain(*b, Default::default(), move |s: &ImpState| Ok(s.lookup(&l)))
        }
        Stmt::If(l, a, b) => {
            let l = *l;
            let test = move |s: &ImpState| {
                s.lookup(&l).as_bool().ok_or_else(|| Error::Internal(format!("condition {l} is not a boolean")))
            };
            Transformer::choose(test, transform_imp(a)?, transform_imp(b)?)
        }
        Stmt::Local(ls, body) => {
            let ls: Vec<Loc> = ls.iter().map(|(l, _)| *l).collect();
            transform_imp(body)?.then(Transformer::pure(move |s: &ImpState| Ok(s.drop_keys(&ls))))
        }
        Stmt::AssignAt(..) | Stmt::For(..) => {
            return Err(Error::Internal("arrays and loops must be unrolled before the Imp semantics".into()))
        }
    })
}
