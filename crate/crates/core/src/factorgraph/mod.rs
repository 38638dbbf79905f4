//! Factor graphs with gates built from hoisted Imp, and their discrete semantics.

mod dot;
mod eval;
mod graph;

pub use dot::to_dot;
pub use eval::graph_measure;
pub use graph::{build_graph, Edge, Graph, Var};

use crate::ast::Expr;
use crate::compiler::{compile, Compiled};
use crate::imp::{Block, ImpState};
use crate::measure::{FiniteMeasure, Posterior, DEFAULT_SUPPORT_CAP};
use crate::{Error, Result};

/// The normalized law of `var` under `Pqq⟦G⟧ μ`.
pub fn marginal(g: &Graph, mu: &FiniteMeasure<ImpState>, var: Var) -> Result<Posterior> {
    let ambient = mu.iter().next().is_some_and(|(s, _)| s.contains(&var));
    if !ambient && !g.free_vars().contains(&var) {
        return Err(Error::Undefined(var.to_string()));
    }
    let out = graph_measure(g, mu)?;
    Posterior::from_unnormalized(&out.map(|s| Ok(s.lookup(&var)))?)
}

/// A compiled program together with its core Imp and factor graph.
pub struct ProgramGraph {
    pub compiled: Compiled,
    pub core: Block,
    pub graph: Graph,
}

pub fn program_graph(e: &Expr) -> Result<ProgramGraph> {
    let compiled = compile(e)?;
    compiled.check_static()?;
    let core = compiled.core()?;
    let graph = build_graph(&core)?;
    Ok(ProgramGraph { compiled, core, graph })
}

/// Posterior of a closed program through its factor graph.
pub fn infer_fg(e: &Expr) -> Result<Posterior> {
    infer_fg_capped(e, DEFAULT_SUPPORT_CAP)
}

pub fn infer_fg_capped(e: &Expr, cap: usize) -> Result<Posterior> {
    let pg = program_graph(e)?;
    let mut start = FiniteMeasure::dirac(ImpState::empty());
    start.set_cap(cap);
    let out = graph_measure(&pg.graph, &start)?;
    let p = pg.compiled.pattern.unrolled();
    Posterior::from_unnormalized(&out.map(|s| Ok(p.read(s)))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{BinOp, Dist};
    use crate::frontend::load;
    use crate::imp::{transform_imp, Loc};
    use crate::typesys::BaseType;
    use crate::value::CanonValue::{self, Bool, Real};

    const TWO_COINS: &str = "let x = random (Bernoulli(0.5)) in let y = random (Bernoulli(0.5)) in \
                             observe (x || y); (x, y)";
    const EPIDEMIOLOGY: &str = "let has_disease = random (Bernoulli(0.01)) in \
        let positive_result = if has_disease then random (Bernoulli(0.8)) else random (Bernoulli(0.096)) in \
        observe positive_result; has_disease";

    fn l(i: u32) -> Loc {
        Loc::new(i)
    }

    fn c(x: Loc, v: CanonValue) -> Edge {
        Edge::Const { x, value: v }
    }

    fn bern(x: Loc, p: Loc) -> Edge {
        Edge::Sample { x, dist: Dist::Bernoulli, args: vec![p] }
    }

    fn g_f() -> Graph {
        let (p, x, y, z) = (l(100), l(101), l(102), l(103));
        Graph {
            bound: vec![],
            edges: vec![
                c(p, Real(0.5)),
                bern(x, p),
                bern(y, p),
                Edge::Op { x: z, op: BinOp::Or, y: x, z: y },
                c(z, Bool(true)),
            ],
        }
    }

    fn g_e() -> Graph {
        let (pd, hd, pp, pn, pr) = (l(100), l(101), l(102), l(103), l(104));
        let branch = |q: Loc, v: f64| Graph { bound: vec![(q, BaseType::Real)], edges: vec![c(q, Real(v)), bern(pr, q)] };
        Graph {
            bound: vec![],
            edges: vec![
                c(pd, Real(0.01)),
                bern(hd, pd),
                Edge::Gate { cond: hd, then: branch(pp, 0.8), r#else: branch(pn, 0.096) },
                c(pr, Bool(true)),
            ],
        }
    }

    fn graph_of(src: &str) -> ProgramGraph {
        program_graph(&load(src).unwrap().core).unwrap()
    }

    fn empty() -> FiniteMeasure<ImpState> {
        FiniteMeasure::dirac(ImpState::empty())
    }

    #[test]
    fn two_coins_is_isomorphic_to_g_f() {
        let pg = graph_of(TWO_COINS);
        let simple = pg.graph.simplify();
        assert_eq!(simple.canonical(false), g_f().canonical(false));
        assert!(pg.graph.edge_count() <= pg.core.size());
        assert!((graph_measure(&g_f(), &empty()).unwrap().total() - 0.75).abs() < 1e-12);
        assert!((graph_measure(&pg.graph, &empty()).unwrap().total() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn epidemiology_is_isomorphic_to_g_e() {
        let pg = graph_of(EPIDEMIOLOGY);
        assert_eq!(pg.graph.simplify().canonical(false), g_e().canonical(false));
        let post = marginal(&g_e(), &empty(), l(101)).unwrap();
        assert!((post.prob(&Bool(true)) - 0.07764).abs() < 5e-6);
        assert!((post.prob(&Bool(false)) - 0.92236).abs() < 5e-6);
        let p = infer_fg(&load(EPIDEMIOLOGY).unwrap().core).unwrap();
        assert!((p.prob(&Bool(true)) - post.prob(&Bool(true))).abs() < 1e-12);
    }

    #[test]
    fn marginal_of_g_f() {
        let post = marginal(&g_f(), &empty(), l(101)).unwrap();
        assert!((post.prob(&Bool(true)) - 2.0 / 3.0).abs() < 1e-12);
        assert!((post.evidence - 0.75).abs() < 1e-12);
        assert!(matches!(marginal(&g_f(), &empty(), l(7)), Err(Error::Undefined(_))));
    }

    #[test]
    fn empty_graph_is_identity() {
        let mu = FiniteMeasure::from_weights([
            (ImpState::from_pairs([(l(0), Bool(true))]), 0.25),
            (ImpState::from_pairs([(l(0), Bool(false))]), 0.5),
        ])
        .unwrap();
        assert_eq!(graph_measure(&Graph::default(), &mu).unwrap(), mu);
    }

    #[test]
    fn graph_agrees_with_imp_on_ambient_measures() {
        let pg = graph_of("let a = random (Binomial(3, 0.4)) in let b = random (DiscreteUniform(4)) in \
                           observe (a > b); if a = 2 then b else a + b");
        let mu = empty();
        let via_imp = transform_imp(&pg.core).unwrap().apply(&mu).unwrap();
        let via_fg = graph_measure(&pg.graph, &mu).unwrap();
        assert!(via_imp.approx_eq(&via_fg, 1e-12));
    }

    #[test]
    fn untaken_branch_is_ignored() {
        let (b, x) = (l(0), l(1));
        let zero = Graph { bound: vec![], edges: vec![c(x, Bool(true)), c(x, Bool(false))] };
        let one = Graph { bound: vec![], edges: vec![c(x, Bool(true))] };
        let g = Graph { bound: vec![], edges: vec![c(b, Bool(true)), Edge::Gate { cond: b, then: one, r#else: zero }] };
        assert_eq!(graph_measure(&g, &empty()).unwrap().total(), 1.0);
    }

    #[test]
    fn continuous_graphs_are_rejected() {
        let pg = graph_of("let x = random (Gaussian(0.0, 1.0)) in observe (x - 1.0)");
        assert!(matches!(graph_measure(&pg.graph, &empty()), Err(Error::ContinuousGraph(_))));
    }
}
