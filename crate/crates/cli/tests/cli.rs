use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncg-forge"))
        .args(args)
        .env_remove("NCG_FORGE_TOL")
        .output()
        .expect("binary runs")
}

fn run_on(cmd: &str, name: &str, extra: &[&str]) -> Output {
    let path = fixture(name);
    let mut args = vec![cmd, path.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// `(command, fixture, exit code)` for the whole corpus.
const CORPUS: &[(&str, &str, i32)] = &[
    ("validate", "two_point.json", 0),
    ("validate", "two_point_even.json", 0),
    // Passes even and real, fails orientability: no algebra-valued cycle represents Gamma.
    ("validate", "two_point_real_even.json", 1),
    ("validate", "mislabeled_ko.json", 1),
    ("validate", "malformed.json", 2),
    ("validate", "schema_violation.json", 2),
    ("validate", "zero_dirac.json", 1),
    ("validate", "m2_states.json", 0),
    ("validate", "two_point_shifted.json", 0),
    ("validate", "two_point_doubled.json", 0),
    ("validate", "c3_category.json", 0),
    ("validate", "non_full_category.json", 1),
    ("validate", "trivial_spaceoid.json", 0),
    ("validate", "broken_spaceoid.json", 1),
    ("validate", "twisted_spaceoid.json", 0),
    ("validate", "identity_morphism.json", 0),
    ("validate", "bad_block_map.json", 2),
    ("morphism", "identity_morphism.json", 0),
    ("morphism", "shifted_morphism.json", 1),
    ("morphism", "doubled_morphism.json", 1),
    ("morphism", "two_point.json", 2),
    ("distance", "two_point.json", 0),
    ("distance", "zero_dirac.json", 0),
    ("distance", "m2_states.json", 0),
    ("distance", "c3_category.json", 2),
    ("dualize", "c3_category.json", 0),
    ("dualize", "trivial_spaceoid.json", 0),
    ("dualize", "twisted_spaceoid.json", 0),
    ("dualize", "non_full_category.json", 1),
    ("dualize", "two_point.json", 2),
];

#[test]
fn corpus_exit_codes() {
    for &(cmd, name, code) in CORPUS {
        for format in ["human", "json"] {
            let out = run_on(cmd, name, &["--format", format]);
            assert_eq!(out.status.code(), Some(code), "{cmd} {name} --format {format}: {}", stderr(&out));
        }
    }
}

#[test]
fn json_output_is_byte_stable() {
    for &(cmd, name, _) in CORPUS {
        let a = run_on(cmd, name, &["--format", "json"]);
        let b = run_on(cmd, name, &["--format", "json"]);
        assert_eq!(a.stdout, b.stdout, "{cmd} {name}");
        json(&a);
    }
    let a = run(&["report", "--seed", "3", "--format", "json"]);
    let b = run(&["report", "--format", "json", "--seed", "3"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn two_point_distance_is_inverse_coupling() {
    let v = json(&run_on("distance", "two_point.json", &["--format", "json"]));
    let m = &v["payload"]["matrix"];
    assert_eq!(m[0][0], 0.0);
    assert!((m[0][1].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert_eq!(m[0][1], m[1][0]);
    let pair = &v["payload"]["pairs"][0];
    assert_eq!((pair["i"].as_u64(), pair["j"].as_u64()), (Some(0), Some(1)));
    assert!(pair["witness"].is_array());
}

#[test]
fn zero_dirac_renders_inf_and_single_state_is_zero() {
    let v = json(&run_on("distance", "zero_dirac.json", &["--format", "json"]));
    assert_eq!(v["payload"]["matrix"][0][1], "inf");
    assert_eq!(v["payload"]["pairs"][0]["value"], "inf");
    let v = json(&run_on("distance", "two_point.json", &["--select", "1", "--format", "json"]));
    assert_eq!(v["payload"]["matrix"], serde_json::json!([[0.0]]));
    let out = run_on("distance", "two_point.json", &["--select", "0,7"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--select"));
}

#[test]
fn oracle_cross_check_agrees() {
    let v = json(&run_on("distance", "m2_states.json", &["--oracle", "--format", "json"]));
    let rows = v["payload"]["oracle"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["agrees"] == true));
    assert_eq!(v["payload"]["matrix"][0][2], "inf");
}

#[test]
fn mislabeled_ko_names_the_sign_entry() {
    let out = run_on("validate", "mislabeled_ko.json", &[]);
    let text = stdout(&out);
    let line = text.lines().find(|l| l.contains(" real ")).unwrap();
    assert!(line.starts_with("  fail"), "{line}");
    assert!(line.contains("j-square"), "{line}");
}

#[test]
fn real_even_fixture_fails_only_orientability() {
    let v = json(&run_on("validate", "two_point_real_even.json", &["--format", "json"]));
    let failed: Vec<&str> = v["payload"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["status"] == "fail")
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["orientable"]);
}

#[test]
fn schema_errors_carry_locations() {
    let out = run_on("validate", "schema_violation.json", &["--format", "json"]);
    let v = json(&out);
    assert_eq!(v["payload"]["location"], "$.payload.dirac");
    let out = run_on("validate", "malformed.json", &[]);
    assert!(stderr(&out).contains("line 3 column 3"), "{}", stderr(&out));
    let out = run_on("validate", "bad_block_map.json", &[]);
    assert!(stderr(&out).contains("$.payload.block_map"));
    let out = run(&["validate", "/nonexistent/file.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn morphism_flavors() {
    let text = stdout(&run_on("morphism", "shifted_morphism.json", &[]));
    assert!(text.contains("tgs         fail"), "{text}");
    assert!(text.contains("riemannian  pass"), "{text}");

    let text = stdout(&run_on("morphism", "doubled_morphism.json", &[]));
    assert!(text.contains("metric      fail"), "{text}");
    assert!(text.contains("0.500000000 vs 0.250000000"), "{text}");

    let v = json(&run_on("morphism", "identity_morphism.json", &["--format", "json"]));
    let flavors: Vec<&str> = v["payload"]["flavors"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["flavor"].as_str().unwrap())
        .collect();
    assert_eq!(flavors, ["tgs", "riemannian", "metric"]);
}

#[test]
fn c3_category_dualizes_to_three_trivial_points() {
    let v = json(&run_on("dualize", "c3_category.json", &[]));
    assert_eq!(v["kind"], "spaceoid");
    assert_eq!(v["payload"]["base_points"], 3);
    for z in v["payload"]["mu"].as_object().unwrap().values() {
        assert_eq!(z, &serde_json::json!([1.0, 0.0]));
    }
}

#[test]
fn trivial_spaceoid_dualizes_to_its_sections() {
    let v = json(&run_on("dualize", "trivial_spaceoid.json", &[]));
    assert_eq!(v["kind"], "category");
    assert_eq!(v["payload"]["hilbert_dims"], serde_json::json!({ "A": 2, "B": 2 }));
    for hom in v["payload"]["hom_bases"].as_object().unwrap().values() {
        assert_eq!(hom.as_array().unwrap().len(), 2);
    }
}

#[test]
fn round_trip_on_every_dualizable_fixture() {
    for name in ["c3_category.json", "trivial_spaceoid.json", "twisted_spaceoid.json"] {
        let out = run_on("dualize", name, &["--round-trip"]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        assert!(stdout(&out).ends_with("isomorphic: true\n"), "{name}");
    }
}

#[test]
fn dualizing_twice_returns_a_valid_document() {
    let dir = std::env::temp_dir().join(format!("ncg-forge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for name in ["c3_category.json", "twisted_spaceoid.json"] {
        let once = dir.join(format!("once-{name}"));
        std::fs::write(&once, run_on("dualize", name, &[]).stdout).unwrap();
        let out = run(&["validate", once.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", stdout(&out));
        let out = run(&["dualize", "--round-trip", once.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        let twice = dir.join(format!("twice-{name}"));
        std::fs::write(&twice, run(&["dualize", once.to_str().unwrap()]).stdout).unwrap();
        assert_eq!(run(&["validate", twice.to_str().unwrap()]).status.code(), Some(0), "{name}");
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn tolerance_flag_and_environment() {
    let path = fixture("broken_spaceoid.json");
    let p = path.to_str().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ncg-forge"))
        .args(["validate", p])
        .env("NCG_FORGE_TOL", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--tol"));
    // The flag overrides the environment.
    let out = Command::new(env!("CARGO_BIN_EXE_ncg-forge"))
        .args(["validate", p, "--tol", "1e-9"])
        .env("NCG_FORGE_TOL", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(run(&["validate", p, "--tol", "nope"]).status.code(), Some(2));
}

#[test]
fn report_sweep_passes() {
    for seed in ["0", "1", "2"] {
        let out = run(&["report", "--seed", seed]);
        assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    }
    let v = json(&run(&["report", "--format", "json"]));
    assert_eq!(v["payload"]["seed"], 0);
    assert!(v["payload"]["checks"].as_array().unwrap().len() >= 7);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
