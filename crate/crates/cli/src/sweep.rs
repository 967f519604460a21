//! `report`: a seeded sweep over generated instances. Each construction
//! contributes one check carrying its worst residual.

use ncg_forge::algebra::{AlgebraHomomorphism, PureState};
use ncg_forge::cstarcat::examples::{random_category, random_unitary};
use ncg_forge::distance::connes_distance;
use ncg_forge::morphisms::{validate_tgs, TripleMorphism};
use ncg_forge::report::{Check, Report, Status};
use ncg_forge::spaceoid::examples::random_spaceoid;
use ncg_forge::spaceoid::{evaluation_transform, gelfand_transform_cat};
use ncg_forge::triple::examples::{ko_triple, random_pure_state, random_triple};
use ncg_forge::triple::{sign_table, validate_real, SpectralTriple};
use ncg_forge::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::output::{checks, envelope, report_lines, verdict};
use crate::{Config, Outcome};

const INSTANCES: usize = 10;
const DISTANCE_TOL: f64 = 2e-6;
const SCALING_TOL: f64 = 1e-5;
const SOLVER_TOL: f64 = 1e-8;

/// Largest finite violation seen so far, with a label for the worst instance.
struct Worst {
    value: f64,
    at: String,
}

impl Worst {
    fn new() -> Self {
        Self {
            value: 0.0,
            at: String::new(),
        }
    }

    fn see(&mut self, v: f64, at: impl FnOnce() -> String) {
        if v > self.value || v.is_nan() {
            self.value = v;
            self.at = at();
        }
    }

    fn check(self, name: &str, tol: f64) -> Check {
        let at = self.at.clone();
        let c = Check::residual(name, self.value, tol);
        if c.status == Status::Fail {
            c.with_detail(at)
        } else {
            c
        }
    }
}

fn distances(t: &SpectralTriple, states: &[PureState]) -> Result<Vec<Vec<f64>>> {
    let k = states.len();
    let mut d = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            if i != j {
                d[i][j] = connes_distance(t, &states[i], &states[j], SOLVER_TOL)?.value;
            }
        }
    }
    Ok(d)
}

fn distance_laws(rng: &mut ChaCha8Rng, r: &mut Report) -> Result<()> {
    let (mut sym, mut tri, mut scale) = (Worst::new(), Worst::new(), Worst::new());
    for n in 0..INSTANCES {
        let t = random_triple(rng, 4)?;
        let states: Vec<PureState> = (0..3).map(|_| random_pure_state(rng, t.algebra())).collect::<Result<_>>()?;
        let d = distances(&t, &states)?;
        let d2 = distances(&t.scale_dirac(2.0), &states)?;
        for i in 0..3 {
            for j in 0..3 {
                if d[i][j].is_finite() && d[j][i].is_finite() {
                    sym.see((d[i][j] - d[j][i]).abs(), || format!("triple {n}, ({i},{j})"));
                }
                if d[i][j].is_finite() {
                    scale.see((d2[i][j] - d[i][j] / 2.0).abs(), || format!("triple {n}, ({i},{j})"));
                }
                for k in 0..3 {
                    if d[i][k].is_finite() && d[i][j].is_finite() && d[j][k].is_finite() {
                        tri.see(d[i][k] - d[i][j] - d[j][k], || format!("triple {n}, ({i},{j},{k})"));
                    }
                }
            }
        }
    }
    r.push(sym.check("distance-symmetry", DISTANCE_TOL));
    r.push(tri.check("distance-triangle", DISTANCE_TOL));
    r.push(scale.check("distance-scaling", SCALING_TOL));
    Ok(())
}

/// Own label passes; every label with a different sign row fails.
fn sign_table_check(tol: f64) -> Result<Check> {
    let mut wrong = Vec::new();
    for n in 0..8u8 {
        if !validate_real(&ko_triple(n), tol)?.passed() {
            wrong.push(format!("{n} fails its own label"));
        }
        for m in 0..8u8 {
            if m != n && sign_table(m) != sign_table(n) {
                let relabeled = ko_triple(n).with_ko_dim(Some(m))?;
                // Parity mismatches are refused outright, which also counts as failing.
                if validate_real(&relabeled, tol).is_ok_and(|r| r.passed()) {
                    wrong.push(format!("{n} passes label {m}"));
                }
            }
        }
    }
    Ok(if wrong.is_empty() {
        Check::new("sign-table", Status::Pass, "")
    } else {
        Check::new("sign-table", Status::Fail, wrong.join(", "))
    })
}

fn dualities(rng: &mut ChaCha8Rng, r: &mut Report, tol: f64) -> Result<()> {
    let mut failed = Vec::new();
    let mut worst = 0.0f64;
    for n in 0..INSTANCES {
        let (objects, points, mult) = (rng.gen_range(1..=3), rng.gen_range(1..=3), rng.gen_range(1..=2));
        let g = gelfand_transform_cat(&random_category(rng, objects, points, mult)?, tol)?;
        worst = worst.max(g.report.worst_residual());
        if !g.report.passed() {
            failed.push(n.to_string());
        }
    }
    r.push(count_check("category-round-trip", worst, &failed));

    let (mut failed, mut worst) = (Vec::new(), 0.0f64);
    for n in 0..INSTANCES {
        let (points, objects) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let e = evaluation_transform(&random_spaceoid(rng, points, objects)?, tol)?;
        worst = worst.max(e.report.worst_residual());
        if !e.report.passed() {
            failed.push(n.to_string());
        }
    }
    r.push(count_check("spaceoid-round-trip", worst, &failed));
    Ok(())
}

fn count_check(name: &str, worst: f64, failed: &[String]) -> Check {
    let mut c = Check::new(
        name,
        if failed.is_empty() { Status::Pass } else { Status::Fail },
        if failed.is_empty() {
            String::new()
        } else {
            format!("instances {}", failed.join(" "))
        },
    );
    c.residual = Some(worst);
    c
}

fn unitary_equivalences(rng: &mut ChaCha8Rng, tol: f64) -> Result<Check> {
    let (mut failed, mut worst) = (Vec::new(), 0.0f64);
    for n in 0..INSTANCES {
        let t = random_triple(rng, 5)?;
        let w = random_unitary(rng, t.dim());
        let m = TripleMorphism::new(t.clone(), t.conjugate(&w)?, AlgebraHomomorphism::identity(t.algebra()), w)?;
        let rep = validate_tgs(&m, tol)?;
        worst = worst.max(rep.worst_residual());
        if !rep.passed() {
            failed.push(n.to_string());
        }
    }
    Ok(count_check("unitary-equivalence-tgs", worst, &failed))
}

fn sweep(seed: u64, tol: f64) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = Report::new();
    distance_laws(&mut rng, &mut r)?;
    r.push(sign_table_check(tol)?);
    dualities(&mut rng, &mut r, tol)?;
    r.push(unitary_equivalences(&mut rng, tol)?);
    Ok(r)
}

pub(crate) fn run(cfg: &Config, seed: u64) -> Outcome {
    let report = match sweep(seed, cfg.tol) {
        Ok(r) => r,
        Err(e) => return cfg.failure("report", &e),
    };
    let passed = report.passed();
    cfg.emit(
        if passed { 0 } else { 1 },
        || format!("seed: {seed}\n{}{}", report_lines(&report), verdict(passed)),
        || envelope("sweep-report", json!({ "seed": seed, "passed": passed, "checks": checks(&report) })),
    )
}
