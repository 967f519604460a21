//! Batch front end: load a JSON document, run the matching validators,
//! solvers or dualities, and print a report.
//!
//! Exit codes are 0 when every applicable check passes, 1 when a check
//! fails or a computation is refused, and 2 for unreadable or malformed
//! input.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use ncg_forge::algebra::{spectrum, PureState};
use ncg_forge::distance::{connes_distance, distance_oracle, oracle_resolution, ORACLE_MAX_DIM};
use ncg_forge::morphisms::{validate_metric, validate_riemannian, validate_tgs};
use ncg_forge::report::{Check, Report, Status};
use ncg_forge::spaceoid::{evaluation_transform, gamma_sections, gelfand_transform_cat, sigma_spaceoid, validate_spaceoid};
use ncg_forge::triple::axiom_report;
use ncg_forge::cstarcat::validate_category;
use ncg_forge::DEFAULT_TOL;
use serde_json::{json, Value};

pub mod output;
pub mod schema;
mod sweep;

use output::{checks, envelope, num, num_text, render, report_lines, verdict};
use schema::{load, Document, Flavor, MorphismDoc, SchemaError};

/// Comparison tolerance for the metric flavor. Distances come from an
/// iterative solver, so the default sits well above `DEFAULT_TOL`.
pub const METRIC_TOL: f64 = 1e-6;

/// Grid points per oracle run.
const ORACLE_BUDGET: f64 = 2e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "ncg-forge", version, about = "Finite spectral triples, Connes distances and Gel'fand dualities")]
pub struct Cli {
    /// Absolute tolerance for validators.
    #[arg(long, global = true, env = "NCG_FORGE_TOL", default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Tolerance when comparing distances in the metric flavor.
    #[arg(long, global = true, default_value_t = METRIC_TOL)]
    pub metric_tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every axiom of a triple, category, spaceoid or morphism document.
    Validate { path: PathBuf },
    /// Pairwise Connes distances between the states of a triple document.
    Distance {
        path: PathBuf,
        /// Comma-separated state indices; all states by default.
        #[arg(long, value_delimiter = ',')]
        select: Option<Vec<usize>>,
        /// Cross-check every pair against the grid oracle.
        #[arg(long)]
        oracle: bool,
    },
    /// Emit the dual of a category (its spectral spaceoid) or of a spaceoid
    /// (its section category).
    Dualize {
        path: PathBuf,
        /// Check instead that the document is isomorphic to its double dual.
        #[arg(long)]
        round_trip: bool,
    },
    /// Check the requested flavors of a morphism document.
    Morphism { path: PathBuf },
    /// Seeded sweep over generated instances of every construction.
    Report {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn new(code: i32, stdout: String) -> Self {
        Self {
            code,
            stdout,
            stderr: String::new(),
        }
    }
}

struct Config {
    tol: f64,
    metric_tol: f64,
    format: Format,
}

impl Config {
    fn emit(&self, code: i32, human: impl FnOnce() -> String, json: impl FnOnce() -> Value) -> Outcome {
        match self.format {
            Format::Human => Outcome::new(code, human()),
            Format::Json => Outcome::new(code, render(&json())),
        }
    }

    fn schema_error(&self, e: &SchemaError) -> Outcome {
        let mut o = match self.format {
            Format::Human => Outcome::new(2, String::new()),
            Format::Json => Outcome::new(
                2,
                render(&envelope(
                    "error",
                    json!({ "category": "schema", "file": e.file, "location": e.location, "message": e.message }),
                )),
            ),
        };
        o.stderr = format!("error: {e}\n");
        o
    }

    /// A computation that was refused or failed a precondition.
    fn failure(&self, what: &str, e: &ncg_forge::Error) -> Outcome {
        let mut o = match self.format {
            Format::Human => Outcome::new(1, String::new()),
            Format::Json => Outcome::new(
                1,
                render(&envelope("error", json!({ "category": "computation", "location": what, "message": e.to_string() }))),
            ),
        };
        o.stderr = format!("error: {what}: {e}\n");
        o
    }
}

pub fn run(cli: &Cli) -> Outcome {
    let cfg = Config {
        tol: cli.tol,
        metric_tol: cli.metric_tol,
        format: cli.format,
    };
    for (flag, v) in [("--tol", cli.tol), ("--metric-tol", cli.metric_tol)] {
        if !(v > 0.0 && v.is_finite()) {
            return cfg.schema_error(&SchemaError::at(flag, format!("tolerance must be a positive number, got {v}")));
        }
    }
    match &cli.command {
        Command::Validate { path } => with_document(&cfg, path, |doc| validate(&cfg, doc)),
        Command::Distance { path, select, oracle } => {
            with_document(&cfg, path, |doc| distance(&cfg, doc, select.as_deref(), *oracle))
        }
        Command::Dualize { path, round_trip } => with_document(&cfg, path, |doc| dualize(&cfg, doc, *round_trip)),
        Command::Morphism { path } => with_document(&cfg, path, |doc| match doc {
            Document::Morphism(m) => morphism(&cfg, &m),
            other => cfg.schema_error(&wrong_kind(&other, "a morphism")),
        }),
        Command::Report { seed } => sweep::run(&cfg, *seed),
    }
}

fn with_document(cfg: &Config, path: &Path, f: impl FnOnce(Document) -> Outcome) -> Outcome {
    match load(path) {
        Ok(doc) => f(doc),
        Err(e) => cfg.schema_error(&e),
    }
}

fn wrong_kind(doc: &Document, expected: &str) -> SchemaError {
    SchemaError::at("$.kind", format!("expected {expected} document, got {}", doc.kind()))
}

fn validate(cfg: &Config, doc: Document) -> Outcome {
    let report = match &doc {
        Document::Triple(t) => axiom_report(&t.triple, cfg.tol),
        Document::Category(c) => Ok(validate_category(c, cfg.tol)),
        Document::Spaceoid(s) => Ok(validate_spaceoid(s, cfg.tol)),
        Document::Morphism(m) => return morphism(cfg, m),
    };
    let report = match report {
        Ok(r) => r,
        Err(e) => return cfg.failure("validate", &e),
    };
    let passed = report.passed();
    cfg.emit(
        if passed { 0 } else { 1 },
        || format!("document: {}\n{}{}", doc.kind(), report_lines(&report), verdict(passed)),
        || {
            envelope(
                "validation-report",
                json!({ "document": doc.kind(), "passed": passed, "checks": checks(&report) }),
            )
        },
    )
}

fn flavor_report(cfg: &Config, doc: &MorphismDoc, f: Flavor) -> Report {
    let m = &doc.morphism;
    let result = match f {
        Flavor::Tgs => validate_tgs(m, cfg.tol),
        Flavor::Riemannian => validate_riemannian(m, cfg.tol),
        Flavor::Metric => validate_metric(m, cfg.metric_tol, doc.states.as_deref()),
    };
    result.unwrap_or_else(|e| {
        let mut r = Report::new();
        r.push(Check::new("precondition", Status::Fail, e.to_string()));
        r
    })
}

fn morphism(cfg: &Config, doc: &MorphismDoc) -> Outcome {
    let reports: Vec<(Flavor, Report)> = doc.flavors.iter().map(|&f| (f, flavor_report(cfg, doc, f))).collect();
    let passed = reports.iter().all(|(_, r)| r.passed());
    cfg.emit(
        if passed { 0 } else { 1 },
        || {
            let mut s = String::from("document: morphism\n");
            for (f, r) in &reports {
                s.push_str(&format!(
                    "{:<11} {}  worst residual={}\n",
                    f.as_str(),
                    if r.passed() { "pass" } else { "fail" },
                    num_text(r.worst_residual())
                ));
                s.push_str(&report_lines(r));
            }
            s + verdict(passed)
        },
        || {
            let flavors: Vec<Value> = reports
                .iter()
                .map(|(f, r)| {
                    json!({
                        "flavor": f.as_str(),
                        "passed": r.passed(),
                        "worst_residual": num(r.worst_residual()),
                        "checks": checks(r),
                    })
                })
                .collect();
            envelope("morphism-report", json!({ "passed": passed, "flavors": flavors }))
        },
    )
}

/// Grid size keeping the oracle within its point budget.
fn oracle_steps(d: usize) -> usize {
    let steps = ORACLE_BUDGET.powf(1.0 / d.max(1) as f64).floor() as usize;
    steps.clamp(3, 201)
}

struct OracleRow {
    value: f64,
    resolution: f64,
    agrees: bool,
}

fn distance(cfg: &Config, doc: Document, select: Option<&[usize]>, oracle: bool) -> Outcome {
    let t = match doc {
        Document::Triple(t) => t,
        other => return cfg.schema_error(&wrong_kind(&other, "a triple")),
    };
    let triple = &t.triple;
    let states: Vec<PureState> = match t.states {
        Some(s) => s,
        None => match spectrum(triple.algebra()) {
            Ok(chars) => chars.into_iter().map(PureState::from_character).collect(),
            Err(_) => {
                return cfg.schema_error(&SchemaError::at("$.payload.states", "a noncommutative algebra needs an explicit state list"))
            }
        },
    };
    let indices: Vec<usize> = match select {
        Some(sel) => {
            if let Some(&bad) = sel.iter().find(|&&i| i >= states.len()) {
                return cfg.schema_error(&SchemaError::at("--select", format!("state {bad} out of range for {} states", states.len())));
            }
            sel.to_vec()
        }
        None => (0..states.len()).collect(),
    };
    let k = indices.len();
    let mut matrix = vec![vec![0.0; k]; k];
    let mut pairs = Vec::new();
    let mut oracle_rows = Vec::new();
    let mut unconverged = Vec::new();
    let sa_dim = triple.algebra().dim();
    for a in 0..k {
        for b in a + 1..k {
            let (i, j) = (indices[a], indices[b]);
            let r = match connes_distance(triple, &states[i], &states[j], cfg.tol) {
                Ok(r) => r,
                Err(e) => return cfg.failure(&format!("distance ({i},{j})"), &e),
            };
            matrix[a][b] = r.value;
            matrix[b][a] = r.value;
            if !r.converged {
                unconverged.push(format!("({i},{j})"));
            }
            if oracle && sa_dim <= ORACLE_MAX_DIM {
                let coords = r.witness.self_adjoint_coords(triple.algebra());
                let radius = coords.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-6);
                let steps = oracle_steps(sa_dim);
                let o = distance_oracle(triple, &states[i], &states[j], radius, steps)
                    .and_then(|o| Ok((o, oracle_resolution(triple, &states[i], &states[j], &r, radius, steps)?)));
                let (o, res) = match o {
                    Ok(v) => v,
                    Err(e) => return cfg.failure(&format!("oracle ({i},{j})"), &e),
                };
                let agrees = if r.is_infinite() {
                    true
                } else {
                    o <= r.value + r.certified_gap + cfg.tol && r.value - o <= res + cfg.tol
                };
                oracle_rows.push((i, j, OracleRow { value: o, resolution: res, agrees }));
            }
            pairs.push((i, j, r));
        }
    }
    let oracle_ok = oracle_rows.iter().all(|(_, _, o)| o.agrees);
    let passed = oracle_ok && unconverged.is_empty();
    let skipped = oracle && sa_dim > ORACLE_MAX_DIM;
    cfg.emit(
        if passed { 0 } else { 1 },
        || {
            let mut s = format!("states: {}\n", indices.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "));
            for row in &matrix {
                s.push_str(&row.iter().map(|&x| format!(" {:>16}", num_text(x))).collect::<String>());
                s.push('\n');
            }
            for (i, j, o) in &oracle_rows {
                s.push_str(&format!(
                    "oracle ({i},{j}): {}  resolution={}  {}\n",
                    num_text(o.value),
                    num_text(o.resolution),
                    if o.agrees { "agrees" } else { "DISAGREES" }
                ));
            }
            if skipped {
                s.push_str(&format!("oracle skipped: self-adjoint dimension {sa_dim} > {ORACLE_MAX_DIM}\n"));
            }
            if !unconverged.is_empty() {
                s.push_str(&format!("not converged: {}\n", unconverged.join(" ")));
            }
            s + verdict(passed)
        },
        || {
            let pair_values: Vec<Value> = pairs
                .iter()
                .map(|(i, j, r)| {
                    json!({
                        "i": i,
                        "j": j,
                        "value": num(r.value),
                        "witness": output::element(&r.witness),
                        "certified_gap": num(r.certified_gap),
                        "converged": r.converged,
                    })
                })
                .collect();
            let state_values: Vec<Value> = indices
                .iter()
                .map(|&i| json!({ "index": i, "block": states[i].block(), "vector": output::vector(states[i].vector()) }))
                .collect();
            let mut payload = json!({
                "states": state_values,
                "matrix": matrix.iter().map(|r| r.iter().map(|&x| num(x)).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "pairs": pair_values,
                "passed": passed,
            });
            if oracle {
                payload["oracle"] = if skipped {
                    json!({ "skipped": format!("self-adjoint dimension {sa_dim} > {ORACLE_MAX_DIM}") })
                } else {
                    Value::Array(
                        oracle_rows
                            .iter()
                            .map(|(i, j, o)| {
                                json!({ "i": i, "j": j, "value": num(o.value), "resolution": num(o.resolution), "agrees": o.agrees })
                            })
                            .collect(),
                    )
                };
            }
            envelope("distance-report", payload)
        },
    )
}

fn dualize(cfg: &Config, doc: Document, round_trip: bool) -> Outcome {
    if round_trip {
        let report = match &doc {
            Document::Category(c) => gelfand_transform_cat(c, cfg.tol).map(|g| g.report),
            Document::Spaceoid(s) => evaluation_transform(s, cfg.tol).map(|e| e.report),
            other => return cfg.schema_error(&wrong_kind(other, "a category or spaceoid")),
        };
        let report = match report {
            Ok(r) => r,
            Err(e) => return cfg.failure("round trip", &e),
        };
        let iso = report.passed();
        return cfg.emit(
            if iso { 0 } else { 1 },
            || format!("document: {}\n{}isomorphic: {iso}\n", doc.kind(), report_lines(&report)),
            || {
                envelope(
                    "round-trip-report",
                    json!({ "document": doc.kind(), "isomorphic": iso, "checks": checks(&report) }),
                )
            },
        );
    }
    // The dual is itself a document, so both formats print it as JSON.
    let dual = match &doc {
        Document::Category(c) => sigma_spaceoid(c).map(|s| output::spaceoid_document(&s)),
        Document::Spaceoid(s) => gamma_sections(s).map(|g| output::category_document(g.category())),
        other => return cfg.schema_error(&wrong_kind(other, "a category or spaceoid")),
    };
    match dual {
        Ok(v) => Outcome::new(0, render(&v)),
        Err(e) => cfg.failure("dualize", &e),
    }
}

/// Parses `args` (program name first) and runs; clap's own usage errors
/// map to exit code 2.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                Outcome::new(0, text)
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            }
        }
    }
}
