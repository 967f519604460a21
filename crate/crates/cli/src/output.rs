//! Serialization shared by every command. Numbers carry 12 significant
//! digits, infinities are the string `"inf"`, and object keys are sorted, so
//! equal inputs give equal bytes.

use ncg_forge::algebra::AlgebraElement;
use ncg_forge::cstarcat::FiniteCStarCategory;
use ncg_forge::report::{Check, Report};
use ncg_forge::spaceoid::Spaceoid;
use ncg_forge::{CMatrix, Complex64};
use serde_json::{json, Map, Value};

use crate::schema::hom_key;

pub fn num(x: f64) -> Value {
    if x.is_nan() {
        return Value::String("nan".into());
    }
    if x.is_infinite() {
        return Value::String(if x > 0.0 { "inf" } else { "-inf" }.into());
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    // Also folds -0 into 0.
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number)
}

/// Human-readable counterpart of [`num`].
pub fn num_text(x: f64) -> String {
    match num(x) {
        Value::String(s) => s,
        v => v.to_string(),
    }
}

pub fn complex(z: Complex64) -> Value {
    json!([num(z.re), num(z.im)])
}

pub fn matrix(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array(m.row(i).iter().map(|&z| complex(z)).collect()))
            .collect(),
    )
}

pub fn vector(v: &[Complex64]) -> Value {
    Value::Array(v.iter().map(|&z| complex(z)).collect())
}

/// One matrix per block.
pub fn element(x: &AlgebraElement) -> Value {
    Value::Array(x.blocks().iter().map(matrix).collect())
}

pub fn check(c: &Check) -> Value {
    json!({
        "name": c.name,
        "status": c.status.as_str(),
        "residual": c.residual.map_or(Value::Null, num),
        "detail": c.detail,
    })
}

pub fn checks(r: &Report) -> Value {
    Value::Array(r.checks.iter().map(check).collect())
}

pub fn envelope(kind: &str, payload: Value) -> Value {
    json!({ "kind": kind, "payload": payload })
}

/// Pretty JSON with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn check_line(c: &Check) -> String {
    let mut line = format!("  {:<14} {}", c.status.as_str(), c.name);
    if let Some(r) = c.residual {
        line.push_str(&format!("  residual={}", num_text(r)));
    }
    if !c.detail.is_empty() {
        line.push_str(&format!("  ({})", c.detail));
    }
    line
}

pub fn report_lines(r: &Report) -> String {
    r.checks.iter().map(|c| check_line(c) + "\n").collect()
}

pub fn verdict(passed: bool) -> &'static str {
    if passed {
        "result: pass\n"
    } else {
        "result: fail\n"
    }
}

/// Category document in the input schema; empty hom-spaces are omitted.
pub fn category_document(c: &FiniteCStarCategory) -> Value {
    let objects = c.objects();
    let mut dims = Map::new();
    for (a, name) in objects.iter().enumerate() {
        dims.insert(name.clone(), json!(c.hilbert_dim(a)));
    }
    let mut homs = Map::new();
    for a in 0..objects.len() {
        for b in 0..objects.len() {
            let basis = c.hom_basis(a, b);
            if !basis.is_empty() {
                homs.insert(hom_key(objects, a, b), Value::Array(basis.iter().map(matrix).collect()));
            }
        }
    }
    envelope(
        "category",
        json!({ "objects": objects, "hilbert_dims": dims, "hom_bases": homs }),
    )
}

/// Spaceoid document listing every structure constant.
pub fn spaceoid_document(s: &Spaceoid) -> Value {
    let objects = s.objects();
    let n = objects.len();
    let (mut mu, mut iota) = (Map::new(), Map::new());
    for p in 0..s.base_points() {
        for a in 0..n {
            for b in 0..n {
                iota.insert(format!("{p},{},{}", objects[a], objects[b]), complex(s.iota(p, a, b)));
                for c in 0..n {
                    mu.insert(
                        format!("{p},{},{},{}", objects[a], objects[b], objects[c]),
                        complex(s.mu(p, a, b, c)),
                    );
                }
            }
        }
    }
    envelope(
        "spaceoid",
        json!({ "base_points": s.base_points(), "objects": objects, "mu": mu, "iota": iota }),
    )
}
