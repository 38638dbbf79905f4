//! The `funstack` command line: check, compile, graph, infer and compare.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use crate::ast::{Expr, ExprKind, Span};
use crate::compiler::{compile, infer_imp_capped};
use crate::enumerator::{enumerate_runs, EnumConfig};
use crate::factorgraph::{infer_fg_capped, program_graph, to_dot};
use crate::frontend::{core_to_json, load, Program};
use crate::fun_sem::value_measure_capped;
use crate::measure::{Posterior, DEFAULT_SUPPORT_CAP};
use crate::sampler::{infer_mc, observe_rewrite, McConfig, McResult};
use crate::typesys::BaseType;
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "funstack", version, about = "Inference for the Fun probabilistic calculus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse and type-check a program.
    Check {
        path: PathBuf,
        /// Include the typed core term.
        #[arg(long)]
        dump_ast: bool,
    },
    /// Compile to Imp.
    Compile {
        path: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Build the factor graph of the compiled program.
    Graph {
        path: PathBuf,
        #[arg(long, conflicts_with = "json")]
        dot: bool,
        #[arg(long)]
        json: bool,
    },
    /// Posterior and evidence of a program.
    Infer {
        path: PathBuf,
        /// Defaults to `enum` for discrete programs and `mc` otherwise.
        #[arg(long, value_enum)]
        backend: Option<Backend>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SUPPORT_CAP)]
        max_support: usize,
        #[arg(long, default_value_t = 24)]
        max_choices: u32,
    },
    /// Check that the exact backends agree on a program or every `.fun` file in a directory.
    Compare {
        path: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    /// Enumeration of runs.
    Enum,
    /// Measure transformers.
    Mt,
    /// Compiled Imp.
    Imp,
    /// Factor graph.
    Fg,
    /// Likelihood-weighted Monte Carlo.
    Mc,
}

impl Backend {
    pub fn id(self) -> &'static str {
        match self {
            Backend::Enum => "enum",
            Backend::Mt => "mt",
            Backend::Imp => "imp",
            Backend::Fg => "fg",
            Backend::Mc => "mc",
        }
    }
}

/// What a command prints: JSON or text on stdout, a summary on stderr.
pub struct Output {
    pub stdout: String,
    pub summary: String,
}

/// Parse arguments, run, print, and return the exit status.
pub fn main_with(args: impl IntoIterator<Item = OsString>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let shown = e.use_stderr();
            let text = e.render().to_string();
            if shown {
                let _ = write!(err, "{text}");
                return 1;
            }
            let _ = write!(out, "{text}");
            return 0;
        }
    };
    configure_threads();
    match execute(&cli) {
        Ok(o) => {
            let _ = writeln!(out, "{}", o.stdout.trim_end());
            if !o.summary.is_empty() {
                let _ = writeln!(err, "{}", o.summary.trim_end());
            }
            0
        }
        Err(e) => {
            let _ = writeln!(out, "{}", error_json(&e));
            let _ = writeln!(err, "error[{}]: {e}", e.kind());
            e.exit_code()
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("FUNSTACK_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // A pool may already exist when called more than once in a process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

pub fn error_json(e: &Error) -> Json {
    let span = match e {
        Error::ContinuousObserve { span } | Error::ContinuousRandom { span, .. } | Error::UnsupportedObserve { span, .. } => {
            Some(*span)
        }
        Error::Frontend(f) => Some(match f {
            crate::frontend::FrontendError::Lex { span, .. }
            | crate::frontend::FrontendError::Parse { span, .. }
            | crate::frontend::FrontendError::Desugar { span, .. } => *span,
        }),
        Error::Type(t) => Some(t.span),
        _ => None,
    };
    json!({
        "error": {
            "kind": e.kind(),
            "message": e.to_string(),
            "exit_code": e.exit_code(),
            "span": span.map(|s| json!({"line": s.line, "col": s.col})),
        }
    })
}

fn read(path: &Path) -> Result<Program> {
    let src = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    load(&src)
}

pub fn execute(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Check { path, dump_ast } => {
            let p = read(path)?;
            let obs = observe_rewrite(&p.flat);
            let mut j = json!({
                "type": p.ty.to_string(),
                "discrete": p.is_discrete(),
                "real_observations": obs.observations,
            });
            if *dump_ast {
                j["ast"] = core_to_json(&p.core);
            }
            Ok(Output { stdout: pretty(&j), summary: format!("{}: {}", path.display(), p.ty) })
        }
        Command::Compile { path, json } => {
            let p = read(path)?;
            let c = compile(&p.core)?;
            c.check_static()?;
            let stdout = if *json { pretty(&c.to_json()) } else { format!("{}\nresult: {}", c.body, c.pattern) };
            Ok(Output { stdout, summary: format!("{} statements", c.core()?.size()) })
        }
        Command::Graph { path, dot, json } => {
            let p = read(path)?;
            let pg = program_graph(&p.core)?;
            let stdout = if *dot {
                to_dot(&pg.graph)
            } else if *json {
                pretty(&json!({"graph": pg.graph, "result": pg.compiled.pattern}))
            } else {
                pg.graph.to_string()
            };
            let summary = format!("{} edges for {} statements", pg.graph.edge_count(), pg.core.size());
            Ok(Output { stdout, summary })
        }
        Command::Infer { path, backend, samples, seed, max_support, max_choices } => {
            let p = read(path)?;
            let backend = backend.unwrap_or(if p.is_discrete() { Backend::Enum } else { Backend::Mc });
            let opts = InferOptions { samples: *samples, seed: *seed, max_support: *max_support, max_choices: *max_choices };
            let report = infer(&p, backend, &opts)?;
            let summary = summarize(&report);
            Ok(Output { stdout: pretty(&report), summary })
        }
        Command::Compare { path, tolerance } => {
            let files = corpus(path)?;
            let rows: Vec<Json> = files.iter().map(|f| compare_file(f, *tolerance)).collect();
            let failed: Vec<&Json> = rows.iter().filter(|r| r["status"] == "fail").collect();
            let summary = format!(
                "{} programs: {} pass, {} skipped, {} fail",
                rows.len(),
                rows.iter().filter(|r| r["status"] == "pass").count(),
                rows.iter().filter(|r| r["status"] == "skipped").count(),
                failed.len()
            );
            if !failed.is_empty() {
                return Err(Error::Internal(format!("backends disagree: {}", pretty(&json!(failed)))));
            }
            Ok(Output { stdout: pretty(&json!({"programs": rows})), summary })
        }
    }
}

fn pretty(j: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(j).expect("JSON values serialize")
}

#[derive(Clone, Copy, Debug)]
pub struct InferOptions {
    pub samples: usize,
    pub seed: u64,
    pub max_support: usize,
    pub max_choices: u32,
}

impl Default for InferOptions {
    fn default() -> Self {
        InferOptions { samples: 100_000, seed: 1, max_support: DEFAULT_SUPPORT_CAP, max_choices: 24 }
    }
}

/// The first draw or observation an exact backend cannot handle.
fn continuous_site(e: &Expr) -> Option<(Span, Option<&'static str>)> {
    match &e.kind {
        ExprKind::Random(d, _) if d.is_continuous() => Some((e.span, Some(d.name()))),
        ExprKind::Observe(_, Some(BaseType::Real)) => Some((e.span, None)),
        ExprKind::Let(_, m, n) | ExprKind::If(_, m, n) => continuous_site(m).or_else(|| continuous_site(n)),
        _ => None,
    }
}

fn exact_gate(p: &Program, backend: Backend) -> Result<()> {
    let Some((span, dist)) = continuous_site(&p.flat) else { return Ok(()) };
    Err(match (backend, dist) {
        (Backend::Fg, Some(d)) => Error::ContinuousGraph(format!("{d} draw at {span} has no discrete factor")),
        (Backend::Fg, None) => Error::ContinuousGraph(format!("real observation at {span} has no discrete factor")),
        (_, Some(d)) => Error::ContinuousRandom { dist: d, span },
        (_, None) => Error::ContinuousObserve { span },
    })
}

/// Run one backend and build the report.
pub fn infer(p: &Program, backend: Backend, opts: &InferOptions) -> Result<Json> {
    let start = Instant::now();
    let mut report = match backend {
        Backend::Mc => {
            let r = infer_mc(&p.flat, McConfig::new(opts.samples, opts.seed))?;
            mc_report(&r)
        }
        exact => {
            exact_gate(p, exact)?;
            let (post, extra) = exact_posterior(p, exact, opts)?;
            let mut j = json!({
                "posterior": posterior_json(&post),
                "evidence": post.evidence,
                "diagnostics": {"support_size": post.dist.len()},
                "seed": null,
            });
            if let Some(runs) = extra {
                j["runs_explored"] = json!(runs);
                j["diagnostics"]["runs_explored"] = json!(runs);
            }
            j
        }
    };
    report["backend"] = json!(backend.id());
    report["diagnostics"]["wall_time_ms"] = json!(start.elapsed().as_secs_f64() * 1e3);
    Ok(report)
}

/// Posterior from an exact backend, with the run count for enumeration.
pub fn exact_posterior(p: &Program, backend: Backend, opts: &InferOptions) -> Result<(Posterior, Option<u64>)> {
    Ok(match backend {
        Backend::Enum => {
            let cfg = EnumConfig { max_choices: opts.max_choices, max_support: opts.max_support, ..Default::default() };
            let en = enumerate_runs(&p.flat, &cfg)?;
            (en.posterior()?, Some(en.runs_explored))
        }
        Backend::Mt => (Posterior::from_unnormalized(&value_measure_capped(&p.flat, opts.max_support)?)?, None),
        Backend::Imp => (infer_imp_capped(&p.core, opts.max_support)?, None),
        Backend::Fg => (infer_fg_capped(&p.core, opts.max_support)?, None),
        Backend::Mc => return Err(Error::Internal("Monte Carlo is not an exact backend".into())),
    })
}

pub fn posterior_json(post: &Posterior) -> Json {
    Json::Array(post.dist.iter().map(|(v, w)| json!({"value": v.to_json(), "probability": w})).collect())
}

fn mc_report(r: &McResult) -> Json {
    let (posterior, se) = match r.table() {
        Some(t) => (
            t.iter().map(|(v, e)| json!({"value": v.to_json(), "probability": e.value})).collect::<Vec<_>>(),
            t.values().map(|e| json!(e.se)).collect::<Vec<_>>(),
        ),
        None => {
            let cs = r.components();
            (
                cs.iter()
                    .map(|c| {
                        let mut j = json!({"path": c.path, "mean": c.mean.value, "variance": c.variance.value});
                        if let Some(p) = c.p_true {
                            j["p_true"] = json!(p.value);
                        }
                        j
                    })
                    .collect(),
                cs.iter()
                    .map(|c| {
                        let mut j = json!({"mean": c.mean.se, "variance": c.variance.se});
                        if let Some(p) = c.p_true {
                            j["p_true"] = json!(p.se);
                        }
                        j
                    })
                    .collect(),
            )
        }
    };
    json!({
        "posterior": posterior,
        "evidence": r.evidence.value,
        "stderr": {"evidence": r.evidence.se, "posterior": se},
        "ess": r.ess,
        "diagnostics": {"samples": r.samples},
        "seed": r.seed,
    })
}

fn summarize(report: &Json) -> String {
    let mut s = format!("backend {}: evidence {}", report["backend"].as_str().unwrap_or("?"), report["evidence"]);
    if let Some(se) = report["stderr"]["evidence"].as_f64() {
        s.push_str(&format!(" ± {se:.2e}"));
    }
    if let Some(items) = report["posterior"].as_array() {
        for it in items.iter().take(16) {
            if let Some(p) = it.get("probability") {
                s.push_str(&format!("\n  {} -> {}", it["value"], p));
            } else {
                s.push_str(&format!("\n  .{} mean {} variance {}", it["path"].as_str().unwrap_or(""), it["mean"], it["variance"]));
            }
        }
    }
    s
}

fn corpus(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_dir() {
        let rd = std::fs::read_dir(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut files: Vec<PathBuf> =
            rd.filter_map(|d| d.ok().map(|d| d.path())).filter(|p| p.extension().is_some_and(|x| x == "fun")).collect();
        files.sort();
        Ok(files)
    } else {
        Ok(vec![path.to_path_buf()])
    }
}

fn max_diff(a: &Posterior, b: &Posterior) -> f64 {
    a.dist.max_abs_diff(&b.dist).max((a.evidence - b.evidence).abs())
}

/// Differential check of one program: enum = mt = imp = fg, static Imp
/// typing, and the graph size bound.
fn compare_file(path: &Path, tol: f64) -> Json {
    let name = path.display().to_string();
    let p = match read(path) {
        Ok(p) => p,
        Err(e) => return json!({"program": name, "status": "fail", "error": error_json(&e)["error"]}),
    };
    if !p.is_discrete() {
        return json!({"program": name, "status": "skipped", "reason": "continuous program"});
    }
    let opts = InferOptions::default();
    let mut results = Vec::new();
    for b in [Backend::Enum, Backend::Mt, Backend::Imp, Backend::Fg] {
        results.push((b, exact_posterior(&p, b, &opts).map(|r| r.0)));
    }
    let mut checks = Vec::new();
    let mut ok = true;
    for w in results.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let pair = format!("{}={}", a.0.id(), b.0.id());
        let check = match (&a.1, &b.1) {
            (Ok(x), Ok(y)) => {
                let d = max_diff(x, y);
                json!({"check": pair, "max_abs_diff": d, "pass": d <= tol})
            }
            (Err(x), Err(y)) => json!({"check": pair, "pass": x.kind() == y.kind(), "error": x.kind()}),
            (x, y) => json!({"check": pair, "pass": false, "left": x.as_ref().err().map(|e| e.kind()), "right": y.as_ref().err().map(|e| e.kind())}),
        };
        ok &= check["pass"] == true;
        checks.push(check);
    }
    match program_graph(&p.core) {
        Ok(pg) => {
            let bound = pg.graph.edge_count() <= pg.core.size();
            ok &= bound;
            checks.push(json!({"check": "static", "pass": true}));
            checks.push(json!({"check": "edges<=statements", "edges": pg.graph.edge_count(), "statements": pg.core.size(), "pass": bound}));
        }
        Err(e) => {
            ok = false;
            checks.push(json!({"check": "static", "pass": false, "error": e.to_string()}));
        }
    }
    let posterior = results[0].1.as_ref().ok().map(posterior_json);
    json!({"program": name, "status": if ok { "pass" } else { "fail" }, "checks": checks, "posterior": posterior})
}
