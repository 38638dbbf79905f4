//! The imperative target language: SSA statements over typed locations.

mod hoist;
mod semantics;
mod syntax;
mod typing;
mod unroll;

pub use hoist::hoist_locals;
pub use semantics::{eval_expr, transform_imp, ImpState, ImpTransformer};
pub use syntax::{Block, ImpEnv, ImpExpr, ImpType, Index, Loc, Stmt};
pub use typing::{show as show_env, typecheck_imp, ImpTypeError};
pub use unroll::unroll_imp;

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::ast::{BinOp, Dist};
    use crate::measure::FiniteMeasure;
    use crate::typesys::{BaseType, RangeId};
    use crate::value::CanonValue::{self, *};

    fn l(i: u32) -> Loc {
        Loc::new(i)
    }
    fn real(x: f64) -> ImpExpr {
        ImpExpr::Const(Real(x))
    }
    const B: ImpType = ImpType::Base(BaseType::Bool);
    const R: ImpType = ImpType::Base(BaseType::Real);

    #[test]
    fn assignment_yields_its_location() {
        let c = Block::one(Stmt::Assign(l(0), real(0.5)));
        assert_eq!(typecheck_imp(&c, &[]).unwrap(), vec![(l(0), R)]);
    }

    #[test]
    fn reassignment_violates_ssa() {
        let c = Block(vec![Stmt::Assign(l(0), real(0.5)), Stmt::Assign(l(0), real(0.6))]);
        assert_eq!(typecheck_imp(&c, &[]).unwrap_err().rule, "Imp Assign");
    }

    #[test]
    fn local_removes_its_location_from_the_yield() {
        let c = Block::one(Stmt::Local(
            vec![(l(1), B)],
            Block(vec![Stmt::Random(l(1), Dist::Bernoulli, vec![l(0)]), Stmt::Assign(l(2), ImpExpr::Loc(l(1)))]),
        ));
        assert_eq!(typecheck_imp(&c, &[(l(0), R)]).unwrap(), vec![(l(2), B)]);
    }

    #[test]
    fn branches_must_yield_the_same_locations() {
        let c = Block::one(Stmt::If(l(0), Block::one(Stmt::Assign(l(1), ImpExpr::Const(Int(1)))), Block::nil()));
        assert_eq!(typecheck_imp(&c, &[(l(0), B)]).unwrap_err().rule, "Imp If");
    }

    #[test]
    fn nil_is_identity_and_observe_filters() {
        let mu: FiniteMeasure<ImpState> = FiniteMeasure::from_weights([
            (ImpState::from_pairs([(l(0), Bool(true))]), 0.3),
            (ImpState::from_pairs([(l(0), Bool(false))]), 0.7),
        ])
        .unwrap();
        assert_eq!(transform_imp(&Block::nil()).unwrap().apply(&mu).unwrap(), mu);
        let obs = transform_imp(&Block::one(Stmt::Observe(BaseType::Bool, l(0)))).unwrap().apply(&mu).unwrap();
        assert_eq!(obs.total(), 0.3);
    }

    #[test]
    fn hoisting_extrudes_scopes_but_keeps_branch_locals() {
        let inner = Block::one(Stmt::Local(vec![(l(3), R)], Block(vec![Stmt::Assign(l(3), real(1.0)), Stmt::Assign(l(4), ImpExpr::Loc(l(3)))])));
        let c = Block(vec![
            Stmt::Local(vec![(l(0), R)], Block(vec![Stmt::Assign(l(0), real(0.5)), Stmt::Random(l(1), Dist::Bernoulli, vec![l(0)])])),
            Stmt::If(l(1), inner.clone(), inner.clone()),
        ]);
        let h = hoist_locals(&c);
        assert_eq!(h.0.len(), 1);
        let Stmt::Local(ls, body) = &h.0[0] else { panic!("expected a local block") };
        assert_eq!(ls, &vec![(l(0), R)]);
        assert!(matches!(&body.0[2], Stmt::If(_, a, _) if a == &inner));
        let mu = FiniteMeasure::dirac(ImpState::empty());
        assert_eq!(transform_imp(&h).unwrap().apply(&mu).unwrap(), transform_imp(&c).unwrap().apply(&mu).unwrap());
        assert_eq!(hoist_locals(&Block::one(Stmt::Assign(l(0), real(1.0)))), Block::one(Stmt::Assign(l(0), real(1.0))));
    }

    #[test]
    fn printer_layout() {
        let c = Block(vec![
            Stmt::Local(vec![(l(0), R)], Block::one(Stmt::Assign(l(0), real(0.5)))),
            Stmt::Random(l(1), Dist::Bernoulli, vec![l(0)]),
            Stmt::Observe(BaseType::Bool, l(1)),
        ]);
        assert_eq!(c.to_string(), "local l0:real {\n  l0 <- 0.5\n}\nl1 <-s Bernoulli(l0)\nobserve[bool] l1\n");
    }

    #[test]
    fn dynamic_reads_select_modulo_the_size() {
        let r = RangeId { size: 3 };
        let arr = l(0);
        let mut types = BTreeMap::new();
        types.insert(arr, ImpType::Array(BaseType::Int, r));
        for i in -4i64..5 {
            let c = Block(vec![
                Stmt::AssignAt(arr, Index::Const(0), ImpExpr::Const(Int(10))),
                Stmt::AssignAt(arr, Index::Const(1), ImpExpr::Const(Int(11))),
                Stmt::AssignAt(arr, Index::Const(2), ImpExpr::Const(Int(12))),
                Stmt::Assign(l(1), ImpExpr::Const(Int(i))),
                Stmt::Assign(l(2), ImpExpr::Elem(arr, Index::Loc(l(1)))),
            ]);
            let core = unroll_imp(&c, &types).unwrap();
            assert!(!core.is_extended());
            typecheck_imp(&core, &[]).unwrap();
            let out = transform_imp(&core).unwrap().apply(&FiniteMeasure::dirac(ImpState::empty())).unwrap();
            let (s, _) = out.iter().next().unwrap();
            assert_eq!(s.lookup(&l(2)), Int(10 + i.rem_euclid(3)), "index {i}");
        }
    }

    #[test]
    fn loops_instantiate_locals_per_iteration() {
        let r = RangeId { size: 2 };
        let mut types = BTreeMap::new();
        types.insert(l(0), ImpType::Array(BaseType::Int, r));
        types.insert(l(9), ImpType::Array(BaseType::Int, r));
        let body = Block::one(Stmt::Local(
            vec![(l(1), ImpType::Base(BaseType::Int)), (l(2), ImpType::Base(BaseType::Int))],
            Block(vec![
                Stmt::Assign(l(1), ImpExpr::Elem(l(0), Index::Range(r))),
                Stmt::Assign(l(2), ImpExpr::Op(BinOp::Add, l(1), l(1))),
                Stmt::AssignAt(l(9), Index::Range(r), ImpExpr::Loc(l(2))),
            ]),
        ));
        let c = Block(vec![
            Stmt::AssignAt(l(0), Index::Const(0), ImpExpr::Const(Int(3))),
            Stmt::AssignAt(l(0), Index::Const(1), ImpExpr::Const(Int(4))),
            Stmt::For(r, body),
        ]);
        let core = unroll_imp(&c, &types).unwrap();
        let y = typecheck_imp(&core, &[]).unwrap();
        assert_eq!(y.len(), 4);
        let out = transform_imp(&core).unwrap().apply(&FiniteMeasure::dirac(ImpState::empty())).unwrap();
        let (s, _) = out.iter().next().unwrap();
        assert_eq!(s.lookup(&l(9).at(1)), Int(8));
        let _: CanonValue = s.lookup(&l(9).at(0));
    }
}
