//! Property checks shared by the property suite and the acceptance runner.

use std::sync::OnceLock;

use funstack::compiler::{compile_open, lift};
use funstack::enumerator::{enumerate_runs, EnumConfig};
use funstack::factorgraph::{build_graph, graph_measure};
use funstack::frontend::parse;
use funstack::fun_sem::{transform, value_measure};
use funstack::imp::transform_imp;
use funstack::sampler::{infer_mc, McConfig};
use funstack::value::CanonValue;
use proptest::prelude::*;
use proptest::test_runner::TestRunner;
use rayon::{ThreadPool, ThreadPoolBuilder};

use super::*;

pub const CASES: u32 = 1000;

pub fn config() -> ProptestConfig {
    ProptestConfig { cases: CASES, failure_persistence: None, ..ProptestConfig::default() }
}

/// Run `check` on `CASES` random seeds; the failure message on error.
pub fn run_seeds(check: fn(u64) -> Result<(), TestCaseError>) -> Result<(), String> {
    TestRunner::new(config()).run(&any::<u64>(), check).map_err(|e| e.to_string())
}

fn pool(threads: usize) -> &'static ThreadPool {
    static ONE: OnceLock<ThreadPool> = OnceLock::new();
    static MANY: OnceLock<ThreadPool> = OnceLock::new();
    let cell = if threads == 1 { &ONE } else { &MANY };
    cell.get_or_init(|| ThreadPoolBuilder::new().num_threads(threads).build().unwrap())
}

/// Without observations every transformer preserves total mass.
pub fn mass_conservation(seed: u64) -> Result<(), TestCaseError> {
    let src = unobserved_program(seed);
    let (_, flat) = load_open(&src);
    let mu = input_measure(seed);
    let out = transform(&flat).unwrap().apply(&mu).unwrap();
    prop_assert!((out.total() - mu.total()).abs() <= 1e-12 * mu.total(), "{src}");
    Ok(())
}

/// With observations mass only drops, and valid plus invalid runs account for all of it.
pub fn observations_lose_mass(seed: u64) -> Result<(), TestCaseError> {
    let src = bernoulli_program(seed);
    let p = load(&src);
    let en = enumerate_runs(&p.flat, &EnumConfig::default()).unwrap();
    prop_assert!((en.valid.total() + en.invalid_mass - 1.0).abs() <= 1e-12, "{src}");
    let (_, flat) = load_open(&src);
    let mu = input_measure(seed);
    let out = transform(&flat).unwrap().apply(&mu).unwrap();
    prop_assert!(out.total() <= mu.total() * (1.0 + 1e-12), "{src}");
    Ok(())
}

/// `T(aμ + bν) = a T(μ) + b T(ν)` for both the Fun and the compiled Imp transformer.
pub fn linearity(seed: u64) -> Result<(), TestCaseError> {
    let src = open_program(seed, seed.is_multiple_of(2));
    let (core, flat) = load_open(&src);
    let (mu, nu) = (input_measure(seed), input_measure(seed.wrapping_add(1)));
    let (a, b) = (weight(seed), weight(seed.wrapping_add(7)));
    let mix = mu.scale(a).unwrap().add(&nu.scale(b).unwrap()).unwrap();
    let fun = transform(&flat).unwrap();
    let imp = compile_open(&core, &open_env()).unwrap().transformer().unwrap();
    for t in [fun, imp] {
        let lhs = t.apply(&mix).unwrap();
        let rhs = t.apply(&mu).unwrap().scale(a).unwrap().add(&t.apply(&nu).unwrap().scale(b).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12, "{src}");
    }
    Ok(())
}

/// Observing `r = c` at bool restricts the value measure to `{c}`.
pub fn filtering(seed: u64) -> Result<(), TestCaseError> {
    let target = !seed.is_multiple_of(3);
    let src = bool_program(seed);
    let wrapped = format!("let r = ({src}) in\nobserve (r = {target});\nr");
    let base = value_measure(&load(&src).flat).unwrap();
    let expected = base.restrict(|v| *v == CanonValue::Bool(target));
    let got = value_measure(&load(&wrapped).flat).unwrap();
    prop_assert!(got.max_abs_diff(&expected) <= 1e-12, "{wrapped}");
    let en = enumerate_runs(&load(&wrapped).flat, &EnumConfig::default()).unwrap();
    prop_assert!(en.valid.max_abs_diff(&expected) <= 1e-12, "{wrapped}");
    Ok(())
}

/// Same seed, same samples and weights bit for bit; another seed changes them.
pub fn seed_determinism(seed: u64) -> Result<(), TestCaseError> {
    let src = continuous_program(seed);
    let p = load(&src);
    let n = 20 + (seed % 280) as usize;
    let chunk = 1 + (seed / 280 % 63) as usize;
    let cfg = McConfig { samples: n, seed, chunk };
    let bits = |w: &[f64]| w.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    match (infer_mc(&p.flat, cfg), infer_mc(&p.flat, cfg)) {
        (Ok(a), Ok(b)) => {
            prop_assert_eq!(&a.values, &b.values);
            prop_assert_eq!(bits(&a.weights), bits(&b.weights));
            let c = infer_mc(&p.flat, McConfig { seed: seed.wrapping_add(1), ..cfg }).unwrap();
            prop_assert!(bits(&a.weights) != bits(&c.weights) || a.values != c.values);
        }
        (Err(a), Err(b)) => prop_assert_eq!(a, b),
        (a, b) => prop_assert!(false, "{:?} vs {:?}", a.err(), b.err()),
    }
    Ok(())
}

/// One worker thread or four: identical samples, and exact results within 1e-12.
pub fn schedule_independence(seed: u64) -> Result<(), TestCaseError> {
    let cont = load(&continuous_program(seed));
    let cfg = McConfig { samples: 256, seed, chunk: 16 };
    let one = pool(1).install(|| infer_mc(&cont.flat, cfg));
    let many = pool(4).install(|| infer_mc(&cont.flat, cfg));
    if let (Ok(one), Ok(many)) = (&one, &many) {
        prop_assert_eq!(&one.values, &many.values);
        prop_assert!(one.weights.iter().zip(&many.weights).all(|(a, b)| a.to_bits() == b.to_bits()));
    } else {
        prop_assert_eq!(one.err(), many.err());
    }

    let src = bernoulli_program(seed);
    let disc = load(&src);
    let seq = EnumConfig { parallel: false, ..EnumConfig::default() };
    let par = EnumConfig { parallel: true, ..EnumConfig::default() };
    let a = pool(1).install(|| enumerate_runs(&disc.flat, &seq)).unwrap();
    let b = pool(4).install(|| enumerate_runs(&disc.flat, &par)).unwrap();
    prop_assert!(a.valid.max_abs_diff(&b.valid) <= 1e-12, "{src}");
    prop_assert!((a.invalid_mass - b.invalid_mass).abs() <= 1e-12);

    let (core, _) = load_open(&src);
    let c = compile_open(&core, &open_env()).unwrap();
    let imp = c.core().unwrap();
    let g = build_graph(&imp).unwrap();
    let mu = input_measure(seed).map(|s| lift(&c.layout, s)).unwrap();
    let x = pool(1).install(|| graph_measure(&g, &mu)).unwrap();
    let y = pool(4).install(|| graph_measure(&g, &mu)).unwrap();
    prop_assert!(x.max_abs_diff(&y) <= 1e-12, "{src}");
    let z = transform_imp(&imp).unwrap().apply(&mu).unwrap();
    prop_assert!(x.max_abs_diff(&z) <= 1e-12, "{src}");
    Ok(())
}

/// Printing a parsed program and parsing it again gives the same tree.
pub fn printer_round_trip(seed: u64) -> Result<(), TestCaseError> {
    let src = if seed.is_multiple_of(2) { structured_program(seed) } else { bernoulli_program(seed) };
    let once = parse(&src).unwrap();
    let printed = once.to_string();
    let twice = parse(&printed).unwrap();
    prop_assert!(once.same_shape(&twice), "{src}\n--\n{printed}");
    prop_assert_eq!(printed, twice.to_string());
    Ok(())
}
