use std::path::Path;

use ncg_forge::Complex64;
use ncg_forge_cli::schema::{parse, Document, Flavor, SchemaError};

fn doc(text: &str) -> Result<Document, SchemaError> {
    parse(text, Path::new("."))
}

fn location(text: &str) -> String {
    doc(text).expect_err("document should be rejected").location
}

const TWO_POINT: &str = r#"{"algebra": [1, 1], "multiplicities": [1, 1], "dirac": [[0, [1, -2]], [[1, 2], 0]]}"#;

#[test]
fn numbers_and_pairs_mix() {
    let Document::Triple(t) = doc(&format!(r#"{{"kind": "triple", "payload": {TWO_POINT}}}"#)).unwrap() else {
        panic!("not a triple");
    };
    assert_eq!(t.triple.dirac()[(1, 0)], Complex64::new(1.0, 2.0));
    assert_eq!(t.triple.dirac()[(0, 1)], Complex64::new(1.0, -2.0));
    assert!(t.states.is_none());
}

#[test]
fn envelope_errors() {
    assert_eq!(location(r#"{"kind": "triple"}"#), "$");
    assert_eq!(location(r#"{"kind": "space", "payload": {}}"#), "$.kind");
    assert_eq!(location(r#"{"kind": "triple", "payload": {}, "extra": 1}"#), "$.extra");
    assert_eq!(location("[1, 2"), "line 1 column 5");
}

#[test]
fn triple_errors_point_into_the_payload() {
    let t = |p: &str| format!(r#"{{"kind": "triple", "payload": {p}}}"#);
    assert_eq!(
        location(&t(r#"{"algebra": [1], "multiplicities": [1, 1], "dirac": [[0]]}"#)),
        "$.payload.multiplicities"
    );
    assert_eq!(
        location(&t(r#"{"algebra": [1, 1], "multiplicities": [1, 1], "dirac": [[0, 1], [1]]}"#)),
        "$.payload.dirac[1]"
    );
    assert_eq!(
        location(&t(r#"{"algebra": [1, 1], "multiplicities": [1, 1], "dirac": [[0, "x"], [1, 0]]}"#)),
        "$.payload.dirac[0][1]"
    );
    // Non-Hermitian D is rejected where it is read.
    assert_eq!(
        location(&t(r#"{"algebra": [1, 1], "multiplicities": [1, 1], "dirac": [[0, 1], [2, 0]]}"#)),
        "$.payload.dirac"
    );
    assert_eq!(
        location(&t(r#"{"algebra": [1], "multiplicities": [1], "dirac": [[0]], "real_structure": {"unitary": [[2]]}}"#)),
        "$.payload.real_structure.unitary"
    );
    assert_eq!(
        location(&t(r#"{"algebra": [1], "multiplicities": [1], "dirac": [[0]], "real_structure": {"unitary": [[1]], "ko_dim": 9}}"#)),
        "$.payload.real_structure.ko_dim"
    );
    assert_eq!(
        location(&t(r#"{"algebra": [2], "multiplicities": [1], "dirac": [[0, 0], [0, 1]], "states": [{"block": 0, "vector": [0, 0]}]}"#)),
        "$.payload.states[0]"
    );
}

#[test]
fn category_schema() {
    let c = |p: &str| format!(r#"{{"kind": "category", "payload": {p}}}"#);
    let ok = doc(&c(r#"{"objects": ["A", "B"], "hilbert_dims": {"A": 1, "B": 1}, "hom_bases": {"A,A": [[[1]]], "B,B": [[[1]]], "A,B": [[[2]]], "B,A": [[[2]]]}}"#)).unwrap();
    let Document::Category(cat) = ok else { panic!() };
    assert_eq!(cat.hom_dim(0, 1), 1);
    assert_eq!(location(&c(r#"{"objects": ["A"], "hilbert_dims": {}, "hom_bases": {}}"#)), "$.payload.hilbert_dims");
    assert_eq!(
        location(&c(r#"{"objects": ["A"], "hilbert_dims": {"A": 2}, "hom_bases": {"A,C": []}}"#)),
        r#"$.payload.hom_bases["A,C"]"#
    );
    assert_eq!(
        location(&c(r#"{"objects": ["A"], "hilbert_dims": {"A": 2}, "hom_bases": {"A,A": [[[1]]]}}"#)),
        r#"$.payload.hom_bases["A,A"][0]"#
    );
    assert_eq!(location(&c(r#"{"objects": ["A", "A"], "hilbert_dims": {}, "hom_bases": {}}"#)), "$.payload.objects");
}

#[test]
fn spaceoid_defaults_and_keys() {
    let s = |p: &str| format!(r#"{{"kind": "spaceoid", "payload": {p}}}"#);
    let Document::Spaceoid(sp) = doc(&s(r#"{"base_points": 2, "objects": ["A"], "mu": {"1,A,A,A": [0, 1]}}"#)).unwrap() else {
        panic!()
    };
    assert_eq!(sp.mu(0, 0, 0, 0), Complex64::new(1.0, 0.0));
    assert_eq!(sp.mu(1, 0, 0, 0), Complex64::new(0.0, 1.0));
    assert_eq!(sp.iota(1, 0, 0), Complex64::new(1.0, 0.0));
    assert_eq!(location(&s(r#"{"base_points": 1, "objects": ["A"], "mu": {"1,A,A,A": 1}}"#)), r#"$.payload.mu["1,A,A,A"]"#);
    assert_eq!(location(&s(r#"{"base_points": 1, "objects": ["A"], "iota": {"0,A": 1}}"#)), r#"$.payload.iota["0,A"]"#);
    assert_eq!(location(&s(r#"{"base_points": 0, "objects": ["A"]}"#)), "$.payload.base_points");
}

#[test]
fn inline_morphism() {
    let m = format!(
        r#"{{"kind": "morphism", "payload": {{"source": {TWO_POINT}, "target": {TWO_POINT}, "map": [[1, 0], [0, 1]], "flavors": ["riemannian", "tgs", "tgs"]}}}}"#
    );
    let Document::Morphism(md) = doc(&m).unwrap() else { panic!() };
    assert_eq!(md.flavors, [Flavor::Riemannian, Flavor::Tgs]);
    assert!(!md.morphism.check_real);

    let bad = format!(r#"{{"kind": "morphism", "payload": {{"source": {TWO_POINT}, "target": {TWO_POINT}, "map": [[1, 0]]}}}}"#);
    assert_eq!(location(&bad), "$.payload.map");
    let bad = format!(r#"{{"kind": "morphism", "payload": {{"source": {TWO_POINT}, "target": {TWO_POINT}, "map": [[1, 0], [0, 1]], "flavors": ["spin"]}}}}"#);
    assert_eq!(location(&bad), "$.payload.flavors[0]");
    let missing = r#"{"kind": "morphism", "payload": {"source": "nowhere.json", "target": "nowhere.json", "map": [[1]]}}"#;
    let e = doc(missing).unwrap_err();
    assert!(e.file.as_deref().is_some_and(|f| f.ends_with("nowhere.json")), "{e}");
}
