//! Random program generators and comparison helpers shared by the integration tests.
#![allow(dead_code)]

pub mod props;

use funstack::ast::{name, Fresh, Name};
use funstack::frontend::{desugar_open, parse, Program};
use funstack::measure::FiniteMeasure;
use funstack::typesys::{typecheck, unroll_arrays, Type, TypeEnv};
use funstack::value::{CanonValue, State};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MAX_CHOICES: usize = 8;
pub const MAX_OBSERVES: usize = 3;

const PROBS: [&str; 9] = ["0.1", "0.25", "0.3", "0.5", "0.5", "0.6", "0.75", "0.9", "1.0"];

/// Free variables available to open programs.
pub fn open_env() -> TypeEnv {
    TypeEnv::from_pairs([(name("z0"), Type::BOOL), (name("z1"), Type::INT)])
}

#[derive(Clone, Copy, PartialEq)]
enum Ty {
    Bool,
    Int,
    Pair,
}

struct Gen {
    rng: ChaCha8Rng,
    scope: Vec<(String, Ty)>,
    choices: usize,
    observes: usize,
    next: usize,
    structured: bool,
    single_result: bool,
}

impl Gen {
    fn new(seed: u64, structured: bool, open: bool) -> Gen {
        let mut scope = Vec::new();
        if open {
            scope.push(("z0".to_string(), Ty::Bool));
            if structured {
                scope.push(("z1".to_string(), Ty::Int));
            }
        }
        Gen { rng: ChaCha8Rng::seed_from_u64(seed), scope, choices: 0, observes: 0, next: 0, structured, single_result: false }
    }

    fn fresh(&mut self, prefix: &str) -> String {
        self.next += 1;
        format!("{prefix}{}", self.next)
    }

    fn vars(&self, t: Ty) -> Vec<String> {
        self.scope.iter().filter(|(_, u)| *u == t).map(|(x, _)| x.clone()).collect()
    }

    fn can_draw(&self) -> bool {
        self.choices < MAX_CHOICES
    }

    fn draw(&mut self, t: Ty) -> String {
        self.choices += 1;
        match t {
            Ty::Bool => format!("random (Bernoulli({}))", PROBS.choose(&mut self.rng).unwrap()),
            _ => match self.rng.gen_range(0..2) {
                0 => format!("random (DiscreteUniform({}))", self.rng.gen_range(1..4)),
                _ => format!("random (Binomial({}, {}))", self.rng.gen_range(1..3), PROBS.choose(&mut self.rng).unwrap()),
            },
        }
    }

    fn bool_expr(&mut self, depth: u32) -> String {
        let vars = self.vars(Ty::Bool);
        let ints = self.vars(Ty::Int);
        let leaf = depth == 0 || self.rng.gen_bool(0.35);
        if leaf {
            if vars.is_empty() || self.rng.gen_bool(0.05) {
                return if self.rng.gen_bool(0.5) { "true" } else { "false" }.into();
            }
            return vars.choose(&mut self.rng).unwrap().clone();
        }
        let roll = self.rng.gen_range(0..if self.structured && !ints.is_empty() { 6 } else { 4 });
        match roll {
            0 => format!("({} && {})", self.bool_expr(depth - 1), self.bool_expr(depth - 1)),
            1 => format!("({} || {})", self.bool_expr(depth - 1), self.bool_expr(depth - 1)),
            2 => format!("({} = {})", self.bool_expr(depth - 1), self.bool_expr(depth - 1)),
            3 => format!(
                "(if {} then {} else {})",
                self.bool_expr(depth - 1),
                self.bool_expr(depth - 1),
                self.bool_expr(depth - 1)
            ),
            4 => format!("({} > {})", self.int_expr(depth - 1), self.int_expr(depth - 1)),
            _ => format!("({} = {})", self.int_expr(depth - 1), self.int_expr(depth - 1)),
        }
    }

    fn int_expr(&mut self, depth: u32) -> String {
        let vars = self.vars(Ty::Int);
        let pairs = self.vars(Ty::Pair);
        if depth == 0 || vars.is_empty() || self.rng.gen_bool(0.3) {
            if !pairs.is_empty() && self.rng.gen_bool(0.3) {
                let p = pairs.choose(&mut self.rng).unwrap().clone();
                return format!("{p}.{}", if self.rng.gen_bool(0.5) { 1 } else { 2 });
            }
            if vars.is_empty() || self.rng.gen_bool(0.2) {
                return self.rng.gen_range(0..4).to_string();
            }
            return vars.choose(&mut self.rng).unwrap().clone();
        }
        match self.rng.gen_range(0..5) {
            0 => format!("({} + {})", self.int_expr(depth - 1), self.int_expr(depth - 1)),
            1 => format!("({} - {})", self.int_expr(depth - 1), self.int_expr(depth - 1)),
            2 => format!("({} * {})", self.int_expr(depth - 1), self.int_expr(depth - 1)),
            3 => format!("({} % {})", self.int_expr(depth - 1), self.rng.gen_range(2..4)),
            _ => format!(
                "(if {} then {} else {})",
                self.bool_expr(depth - 1),
                self.int_expr(depth - 1),
                self.int_expr(depth - 1)
            ),
        }
    }

    fn observation(&mut self) -> String {
        self.observes += 1;
        if self.structured && !self.vars(Ty::Int).is_empty() && self.rng.gen_bool(0.4) {
            // Integer observations hold at 0.
            format!("observe ({} - {})", self.int_expr(1), self.int_expr(1))
        } else {
            format!("observe {}", self.bool_expr(2))
        }
    }

    // A branch body of type `t`, possibly drawing and observing.
    fn branch(&mut self, t: Ty) -> String {
        let body = if t == Ty::Bool {
            if self.can_draw() && self.rng.gen_bool(0.6) {
                self.draw(Ty::Bool)
            } else {
                self.bool_expr(1)
            }
        } else if self.can_draw() && self.rng.gen_bool(0.5) {
            self.draw(Ty::Int)
        } else {
            self.int_expr(1)
        };
        if self.observes < MAX_OBSERVES && self.rng.gen_bool(0.3) {
            let obs = self.observation();
            format!("({obs}; {body})")
        } else {
            format!("({body})")
        }
    }

    fn step(&mut self, out: &mut String) {
        let roll = self.rng.gen_range(0..if self.structured { 8 } else { 5 });
        match roll {
            0 | 1 if self.can_draw() => {
                let t = if self.structured && roll == 1 { Ty::Int } else { Ty::Bool };
                let x = self.fresh(if t == Ty::Bool { "b" } else { "n" });
                let d = self.draw(t);
                out.push_str(&format!("let {x} = {d} in\n"));
                self.scope.push((x, t));
            }
            2 if self.observes < MAX_OBSERVES => {
                let o = self.observation();
                out.push_str(&format!("{o};\n"));
            }
            3 => {
                let t = if self.structured && self.rng.gen_bool(0.4) { Ty::Int } else { Ty::Bool };
                let x = self.fresh(if t == Ty::Bool { "c" } else { "k" });
                let c = self.bool_expr(1);
                let (m, n) = (self.branch(t), self.branch(t));
                out.push_str(&format!("let {x} = if {c} then {m} else {n} in\n"));
                self.scope.push((x, t));
            }
            5 => {
                let x = self.fresh("t");
                let (a, b) = (self.int_expr(1), self.int_expr(1));
                out.push_str(&format!("let {x} = ({a}, {b}) in\n"));
                self.scope.push((x, Ty::Pair));
            }
            6 if !self.vars(Ty::Pair).is_empty() => {
                let p = self.vars(Ty::Pair).choose(&mut self.rng).unwrap().clone();
                let (u, v) = (self.fresh("u"), self.fresh("v"));
                out.push_str(&format!("let ({u}, {v}) = {p} in\n"));
                self.scope.push((u, Ty::Int));
                self.scope.push((v, Ty::Int));
            }
            7 if !self.vars(Ty::Int).is_empty() => {
                let x = self.fresh("a");
                let i = self.int_expr(1);
                let src = if self.rng.gen_bool(0.5) { "[0; 1; 2]" } else { "[1; 3]" };
                out.push_str(&format!("let {x} = [for y in {src} -> (y + {i}) % 3] in\n"));
                let j = self.vars(Ty::Int).choose(&mut self.rng).unwrap().clone();
                let k = self.fresh("e");
                out.push_str(&format!("let {k} = {x}.[{j}] in\n"));
                self.scope.push((k, Ty::Int));
            }
            _ => {
                let x = self.fresh("d");
                let e = self.bool_expr(2);
                out.push_str(&format!("let {x} = {e} in\n"));
                self.scope.push((x, Ty::Bool));
            }
        }
    }

    fn result(&mut self) -> String {
        let want = |t: Ty| if self.single_result { t == Ty::Bool } else { t != Ty::Pair };
        let mut candidates: Vec<String> =
            self.scope.iter().filter(|(x, t)| !x.starts_with('z') && want(*t)).map(|(x, _)| x.clone()).collect();
        if candidates.is_empty() {
            return self.bool_expr(1);
        }
        candidates.shuffle(&mut self.rng);
        let k = if self.single_result { 1 } else { self.rng.gen_range(1..=candidates.len().min(3)) };
        let items = &candidates[..k];
        if k == 1 {
            items[0].clone()
        } else {
            format!("({})", items.join(", "))
        }
    }

    fn program(mut self) -> String {
        let steps = self.rng.gen_range(2..12);
        let mut out = String::new();
        let first = if self.structured { Ty::Int } else { Ty::Bool };
        let x = self.fresh("b");
        let d = self.draw(first);
        out.push_str(&format!("let {x} = {d} in\n"));
        self.scope.push((x, first));
        for _ in 0..steps {
            self.step(&mut out);
        }
        let r = self.result();
        out.push_str(&r);
        out
    }
}

/// A closed Bernoulli Fun program: booleans only, at most eight draws and three observations.
pub fn bernoulli_program(seed: u64) -> String {
    Gen::new(seed, false, false).program()
}

/// A closed Bernoulli program without observations.
pub fn unobserved_program(seed: u64) -> String {
    let mut g = Gen::new(seed, false, false);
    g.observes = MAX_OBSERVES;
    g.program()
}

/// A closed Bernoulli program whose result is a single boolean.
pub fn bool_program(seed: u64) -> String {
    let mut g = Gen::new(seed, false, false);
    g.single_result = true;
    g.program()
}

/// A closed discrete program with integers, tuples, projections and comprehensions.
pub fn structured_program(seed: u64) -> String {
    Gen::new(seed, true, false).program()
}

/// Like the generators above, but free in `z0: bool` (and `z1: int` when structured).
pub fn open_program(seed: u64, structured: bool) -> String {
    Gen::new(seed, structured, true).program()
}

/// The typed core term and its array-free form for an open program over [`open_env`].
pub fn load_open(src: &str) -> (funstack::ast::Expr, funstack::ast::Expr) {
    let s = parse(src).unwrap_or_else(|e| panic!("{e}\n{src}"));
    let gamma = open_env();
    let free: Vec<Name> = gamma.iter().map(|(x, _)| x.clone()).collect();
    let mut fresh = Fresh::new();
    for x in &free {
        fresh.reserve(x);
    }
    let mut core = desugar_open(&s, &free, &mut fresh).unwrap_or_else(|e| panic!("{e}\n{src}"));
    typecheck(&mut core, &gamma).unwrap_or_else(|e| panic!("{e}\n{src}"));
    let mut flat = unroll_arrays(&core, &mut fresh).unwrap();
    typecheck(&mut flat, &gamma).unwrap();
    (core, flat)
}

pub fn load(src: &str) -> Program {
    funstack::frontend::load(src).unwrap_or_else(|e| panic!("{e}\n{src}"))
}

/// A random finite measure over states of [`open_env`] with one to four atoms.
pub fn input_measure(seed: u64) -> FiniteMeasure<State> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut mu = FiniteMeasure::zero();
    for _ in 0..rng.gen_range(1..=4) {
        let s = State::from_pairs([
            (name("z0"), CanonValue::Bool(rng.gen_bool(0.5))),
            (name("z1"), CanonValue::Int(rng.gen_range(-2..3))),
        ]);
        mu.add_mass(s, rng.gen_range(0.05..1.0)).unwrap();
    }
    mu
}

/// A random scalar in `[0.1, 2)`.
pub fn weight(seed: u64) -> f64 {
    ChaCha8Rng::seed_from_u64(seed ^ 0xface).gen_range(0.1..2.0)
}

/// `|μ - ν|∞` over the union of supports.
pub fn max_diff<K: Ord + Clone>(a: &FiniteMeasure<K>, b: &FiniteMeasure<K>) -> f64 {
    a.max_abs_diff(b)
}

/// Outcome of comparing the enumerator with the measure-transformer semantics.
#[derive(Debug, PartialEq)]
pub enum Agreement {
    /// Both posteriors exist; the largest probability or evidence gap.
    Posterior(f64),
    /// Both backends raised ZeroEvidence.
    ZeroEvidence,
}

/// Enumerator posterior against `infer_mt` on a closed discrete program.
pub fn enum_vs_mt(src: &str) -> Result<Agreement, String> {
    use funstack::enumerator::{posterior, EnumConfig};
    use funstack::fun_sem::infer_mt;
    use funstack::Error;
    let p = load(src);
    match (posterior(&p.flat, &EnumConfig::default()), infer_mt(&p.flat)) {
        (Ok(a), Ok(b)) => Ok(Agreement::Posterior(a.dist.max_abs_diff(&b.dist).max((a.evidence - b.evidence).abs()))),
        (Err(Error::ZeroEvidence), Err(Error::ZeroEvidence)) => Ok(Agreement::ZeroEvidence),
        (a, b) => Err(format!("backends disagree: {:?} vs {:?}", a.err(), b.err())),
    }
}

/// `A⟦M⟧ μ` against lift, `impdt⟦C⟧`, restrict for `inputs` random input measures.
/// Returns the largest difference seen; fails if the translation does not type-check.
pub fn fun_vs_imp(src: &str, seed: u64, inputs: u64) -> Result<f64, String> {
    use funstack::compiler::compile_open;
    use funstack::fun_sem::transform;
    let (core, flat) = load_open(src);
    let c = compile_open(&core, &open_env()).map_err(|e| e.to_string())?;
    c.check_static().map_err(|e| format!("translation does not type-check: {e}"))?;
    let via_imp = c.transformer().map_err(|e| e.to_string())?;
    let via_fun = transform(&flat).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for k in 0..inputs {
        let mu = input_measure(seed.wrapping_mul(31).wrapping_add(k));
        let a = via_fun.apply(&mu).map_err(|e| e.to_string())?;
        let b = via_imp.apply(&mu).map_err(|e| e.to_string())?;
        worst = worst.max(a.max_abs_diff(&b));
    }
    Ok(worst)
}

/// `impdt⟦C⟧ μ` against `Pqq⟦impfg(C)⟧ μ` on a lifted random input measure.
/// Returns the difference and `(edges, statements)`.
pub fn imp_vs_fg(src: &str, seed: u64) -> Result<(f64, usize, usize), String> {
    use funstack::compiler::{compile_open, lift};
    use funstack::factorgraph::{build_graph, graph_measure};
    use funstack::imp::transform_imp;
    let (core, _) = load_open(src);
    let c = compile_open(&core, &open_env()).map_err(|e| e.to_string())?;
    c.check_static().map_err(|e| e.to_string())?;
    let imp = c.core().map_err(|e| e.to_string())?;
    let g = build_graph(&imp).map_err(|e| e.to_string())?;
    let mu = input_measure(seed).map(|s| lift(&c.layout, s)).map_err(|e| e.to_string())?;
    let a = transform_imp(&imp).and_then(|t| t.apply(&mu)).map_err(|e| e.to_string())?;
    let b = graph_measure(&g, &mu).map_err(|e| e.to_string())?;
    Ok((a.max_abs_diff(&b), g.edge_count(), imp.size()))
}

/// A continuous program in the fragment the sampler accepts: latent draws,
/// pivot draws each observed once against a value in scope, boolean evidence.
pub fn continuous_program(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    let mut reals = vec![];
    for i in 0..rng.gen_range(1..=3) {
        let x = format!("x{i}");
        let d = match rng.gen_range(0..3) {
            0 => format!("Gaussian({:.1}, {:.1})", rng.gen_range(-2.0..2.0), rng.gen_range(0.5..3.0)),
            1 => format!("Beta({:.1}, {:.1})", rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0)),
            _ => format!("Gamma({:.1}, {:.1})", rng.gen_range(0.5..3.0), rng.gen_range(0.5..2.0)),
        };
        out.push_str(&format!("let {x} = random ({d}) in\n"));
        reals.push(x);
    }
    for j in 0..rng.gen_range(0..=2) {
        let mean = reals.choose(&mut rng).unwrap().clone();
        let p = format!("p{j}");
        out.push_str(&format!("let {p} = random (Gaussian({mean}, 1.0)) in\n"));
        let c = format!("{:.2}", rng.gen_range(-1.0..1.0));
        let obs = match rng.gen_range(0..3) {
            0 => format!("({c} - {p})"),
            1 => format!("({p} - {c})"),
            _ => p.clone(),
        };
        out.push_str(&format!("observe {obs};\n"));
    }
    if rng.gen_bool(0.5) {
        let x = reals.choose(&mut rng).unwrap();
        out.push_str(&format!("let b = random (Bernoulli(0.7)) in\nobserve (b || ({x} > 0.5));\n"));
    }
    let r = reals.choose(&mut rng).unwrap().clone();
    match rng.gen_range(0..3) {
        0 => out.push_str(&r),
        1 => out.push_str(&format!("({r}, {r} > 0.0)")),
        _ => out.push_str(&format!("({r} + 1.0) * 2.0")),
    }
    out
}
