use num_complex::Complex64;

use super::hochschild::find_orientation_cycle;
use super::SpectralTriple;
use crate::error::{Error, Result};
use crate::numkernel::{operator_norm, rank};
use crate::report::{Check, Report, Status};
use crate::CMatrix;

/// Signs `(eps, eps', eps'')` with `J^2 = eps`, `JD = eps' DJ`, `J Gamma = eps'' Gamma J`.
/// `eps''` is absent in odd KO-dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KoSigns {
    pub j_square: i8,
    pub j_dirac: i8,
    pub j_grading: Option<i8>,
}

pub fn sign_table(n: u8) -> KoSigns {
    let (a, b, c) = match n % 8 {
        0 => (1, 1, Some(1)),
        1 => (1, -1, None),
        2 => (-1, 1, Some(-1)),
        3 => (-1, 1, None),
        4 => (-1, 1, Some(1)),
        5 => (-1, -1, None),
        6 => (1, 1, Some(-1)),
        _ => (1, 1, None),
    };
    KoSigns {
        j_square: a,
        j_dirac: b,
        j_grading: c,
    }
}

fn norm(m: &CMatrix) -> f64 {
    operator_norm(m).unwrap_or(f64::NAN)
}

fn sign_str(s: i8) -> &'static str {
    if s > 0 {
        "+"
    } else {
        "-"
    }
}

/// Residual of `x = sign * y`, with the sign that `x` actually carries.
fn sign_check(name: &str, x: &CMatrix, y: &CMatrix, required: i8, tol: f64) -> Check {
    let plus = norm(&(x - y));
    let minus = norm(&(x + y));
    let found = match (plus <= tol, minus <= tol) {
        (true, true) => "either",
        (true, false) => "+",
        (false, true) => "-",
        _ => "neither",
    };
    let r = if required > 0 { plus } else { minus };
    Check::residual(name, r, tol).with_detail(format!("required {}, found {found}", sign_str(required)))
}

/// Grading checks: self-adjoint, involutive, even algebra, odd Dirac.
pub fn validate_even(t: &SpectralTriple, tol: f64) -> Result<Report> {
    let g = t
        .grading()
        .ok_or_else(|| Error::Precondition("validate_even needs a grading".into()))?;
    let n = t.dim();
    let mut r = Report::new();
    r.push(Check::residual("grading-self-adjoint", norm(&(g - &g.adjoint())), tol));
    r.push(Check::residual("grading-involution", norm(&(&(g * g) - &CMatrix::identity(n))), tol));
    let worst = t
        .representation()
        .generator_images()
        .iter()
        .map(|p| norm(&CMatrix::commutator(g, p)))
        .fold(0.0, f64::max);
    r.push(Check::residual("grading-commutes-algebra", worst, tol));
    r.push(Check::residual(
        "grading-anticommutes-dirac",
        norm(&CMatrix::anticommutator(g, t.dirac())),
        tol,
    ));
    Ok(r)
}

/// Zeroth- and first-order conditions of `t`'s real structure, on matrix units.
/// Both reported as `(zeroth, first)`.
pub fn validate_first_order(t: &SpectralTriple, tol: f64) -> Result<(Check, Check)> {
    let j = t
        .real_structure()
        .ok_or_else(|| Error::Precondition("order conditions need a real structure".into()))?;
    let alg = t.algebra();
    let units = alg.matrix_units();
    let pis: Vec<CMatrix> = t.representation().generator_images();
    let ops: Vec<CMatrix> = units
        .iter()
        .map(|&u| j.conjugate_op(&t.pi(&alg.matrix_unit(u).adjoint()).expect("own element")))
        .collect();
    let comms: Vec<CMatrix> = pis.iter().map(|p| CMatrix::commutator(t.dirac(), p)).collect();
    let mut zeroth = 0.0f64;
    let mut first = 0.0f64;
    for o in &ops {
        for (p, c) in pis.iter().zip(&comms) {
            zeroth = zeroth.max(norm(&CMatrix::commutator(p, o)));
            first = first.max(norm(&CMatrix::commutator(c, o)));
        }
    }
    Ok((
        Check::residual("zeroth-order", zeroth, tol),
        Check::residual("first-order", first, tol),
    ))
}

/// Real-structure checks against the sign row of the declared KO-dimension.
pub fn validate_real(t: &SpectralTriple, tol: f64) -> Result<Report> {
    let j = t
        .real_structure()
        .ok_or_else(|| Error::Precondition("validate_real needs a real structure".into()))?;
    let n = t
        .ko_dim()
        .ok_or_else(|| Error::Precondition("validate_real needs a KO-dimension".into()))?;
    let signs = sign_table(n);
    if signs.j_grading.is_some() && t.grading().is_none() {
        return Err(Error::Precondition(format!(
            "KO-dimension {n} is even: the [J,Gamma] sign entry needs a grading"
        )));
    }
    let mut r = Report::new();
    let (z, f) = validate_first_order(t, tol)?;
    r.push(z);
    r.push(f);
    let id = CMatrix::identity(t.dim());
    r.push(sign_check("j-square", &j.square(), &id, signs.j_square, tol));
    let d = t.dirac();
    r.push(sign_check("j-dirac", &j.conjugate_op(d), d, signs.j_dirac, tol));
    match (signs.j_grading, t.grading()) {
        (Some(s), Some(g)) => r.push(sign_check("j-grading", &j.conjugate_op(g), g, s, tol)),
        (None, Some(_)) => r.push(Check::new(
            "j-grading",
            Status::Fail,
            format!("KO-dimension {n} is odd but a grading is present"),
        )),
        (None, None) => r.push(Check::new("j-grading", Status::NotApplicable, "odd KO-dimension")),
        (Some(_), None) => unreachable!("checked above"),
    }
    Ok(r)
}

/// Realified linear system whose kernel is the Hermitian part of the joint
/// commutant of `pi(A)`, `D`, `Gamma` and `J`.
fn commutant_system(t: &SpectralTriple) -> CMatrix {
    let n = t.dim();
    let basis = hermitian_basis(n);
    let mut ops = t.representation().generator_images();
    ops.push(t.dirac().clone());
    if let Some(g) = t.grading() {
        ops.push(g.clone());
    }
    let u = t.real_structure().map(|j| j.unitary().clone());
    let blocks = ops.len() + usize::from(u.is_some());
    let rows = 2 * n * n * blocks;
    let mut m = CMatrix::zeros(rows, basis.len());
    for (k, h) in basis.iter().enumerate() {
        let mut col = Vec::with_capacity(rows);
        let mut push = |x: &CMatrix| {
            col.extend(x.as_slice().iter().map(|z| Complex64::new(z.re, 0.0)));
            col.extend(x.as_slice().iter().map(|z| Complex64::new(z.im, 0.0)));
        };
        for o in &ops {
            push(&CMatrix::commutator(h, o));
        }
        if let Some(u) = &u {
            push(&(&(h * u) - &(u * &h.conj())));
        }
        m.set_column(k, &col);
    }
    m
}

/// Hilbert-Schmidt orthonormal real basis of `n x n` Hermitian matrices.
fn hermitian_basis(n: usize) -> Vec<CMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in i..n {
            if i == j {
                let mut e = CMatrix::zeros(n, n);
                e[(i, i)] = Complex64::new(1.0, 0.0);
                out.push(e);
                continue;
            }
            let mut sym = CMatrix::zeros(n, n);
            sym[(i, j)] = Complex64::new(s, 0.0);
            sym[(j, i)] = Complex64::new(s, 0.0);
            out.push(sym);
            let mut anti = CMatrix::zeros(n, n);
            anti[(i, j)] = Complex64::new(0.0, s);
            anti[(j, i)] = Complex64::new(0.0, -s);
            out.push(anti);
        }
    }
    out
}

/// Real dimension of the self-adjoint part of the joint commutant.
pub fn commutant_dimension(t: &SpectralTriple) -> Result<usize> {
    let m = commutant_system(t);
    Ok(m.cols() - rank(&m, 1e-8)?)
}

/// Irreducible iff the joint commutant is spanned by the identity.
pub fn is_irreducible(t: &SpectralTriple) -> Result<bool> {
    Ok(commutant_dimension(t)? == 1)
}

/// One entry per axiom; `validate` on the command line passes iff none fails.
pub fn axiom_report(t: &SpectralTriple, tol: f64) -> Result<Report> {
    let mut r = Report::new();
    r.push(Check::residual("dirac-self-adjoint", t.dirac().hermitian_residual(), tol));
    r.push(Check::new("compact-resolvent", Status::Trivial, "finite dimension"));
    r.push(Check::new("bounded-commutators", Status::Trivial, "finite dimension"));
    r.push(Check::new("theta-summable", Status::Trivial, "finite dimension"));
    r.push(Check::new("finite", Status::Trivial, "finite dimension"));
    r.push(Check::new("n-dimensionality", Status::NotApplicable, "Dixmier trace vanishes in finite dimension"));
    r.push(Check::new("regular", Status::NotApplicable, "not checked in finite dimension"));
    r.push(Check::new("poincare-duality", Status::NotApplicable, "not checked"));
    let faithful = t.representation().is_faithful();
    r.push(Check::new(
        "faithful",
        if faithful { Status::Pass } else { Status::Fail },
        if faithful { "" } else { "a block has multiplicity 0" },
    ));
    r.push(summary("even", t.grading().map(|_| validate_even(t, tol))));
    r.push(summary("real", t.real_structure().map(|_| validate_real(t, tol))));
    r.push(orientation_entry(t)?);
    let irr = is_irreducible(t)?;
    r.push(Check::new(
        "irreducible",
        if irr { Status::Pass } else { Status::Fail },
        format!("commutant dimension {}", commutant_dimension(t)?),
    ));
    Ok(r)
}

fn summary(name: &str, sub: Option<Result<Report>>) -> Check {
    match sub {
        None => Check::new(name, Status::NotSupplied, "structure not supplied"),
        Some(Err(e)) => Check::new(name, Status::Fail, e.to_string()),
        Some(Ok(rep)) => {
            let failed: Vec<String> = rep
                .failures()
                .map(|c| match c.residual {
                    Some(x) => format!("{} ({x:e}; {})", c.name, c.detail),
                    None => format!("{} ({})", c.name, c.detail),
                })
                .collect();
            let mut c = Check::new(
                name,
                if failed.is_empty() { Status::Pass } else { Status::Fail },
                failed.join(", "),
            );
            c.residual = Some(rep.worst_residual());
            c
        }
    }
}

fn orientation_entry(t: &SpectralTriple) -> Result<Check> {
    if t.grading().is_none() {
        return Ok(Check::new("orientable", Status::Trivial, "odd: c = 1 in degree 0"));
    }
    for n in 0..=2 {
        match find_orientation_cycle(t, n) {
            Ok(Some(_)) => return Ok(Check::new("orientable", Status::Pass, format!("cycle of degree {n}"))),
            Ok(None) => {}
            Err(Error::Refused(_)) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(Check::new("orientable", Status::Fail, "no Hochschild cycle up to degree 2 represents Gamma"))
}
