use num_complex::Complex64;

use super::SpectralTriple;
use crate::algebra::{AlgebraElement, FiniteCStarAlgebra, MatrixUnit};
use crate::error::{dim_err, Error, Result};
use crate::numkernel::{distance_to_span, lstsq, null_space, span_basis};
use crate::report::{Check, Report};
use crate::CMatrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Coordinate spaces larger than this are refused.
pub const MAX_CHAIN_DIM: usize = 729;

/// `c = sum_j coef_j a_0^(j) (x) ... (x) a_n^(j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HochschildChain {
    algebra: FiniteCStarAlgebra,
    degree: usize,
    terms: Vec<(Complex64, Vec<AlgebraElement>)>,
}

fn chain_dim(alg: &FiniteCStarAlgebra, degree: usize) -> Result<usize> {
    let mut d: usize = 1;
    for _ in 0..=degree {
        d = d.saturating_mul(alg.dim());
    }
    if d > MAX_CHAIN_DIM {
        return Err(Error::Refused(format!(
            "degree-{degree} chains over an algebra of dimension {} have {d} coordinates (limit {MAX_CHAIN_DIM})",
            alg.dim()
        )));
    }
    Ok(d)
}

/// Unit tuple for a flat coordinate index, first factor most significant.
fn unit_tuple(units: &[MatrixUnit], degree: usize, mut idx: usize) -> Vec<MatrixUnit> {
    let m = units.len();
    let mut out = vec![units[0]; degree + 1];
    for slot in out.iter_mut().rev() {
        *slot = units[idx % m];
        idx /= m;
    }
    out
}

fn unit_product(a: MatrixUnit, b: MatrixUnit) -> Option<MatrixUnit> {
    (a.block == b.block && a.col == b.row).then_some(MatrixUnit {
        block: a.block,
        row: a.row,
        col: b.col,
    })
}

impl HochschildChain {
    pub fn new(
        algebra: FiniteCStarAlgebra,
        degree: usize,
        terms: Vec<(Complex64, Vec<AlgebraElement>)>,
    ) -> Result<Self> {
        for (_, t) in &terms {
            if t.len() != degree + 1 {
                return dim_err(format!("term with {} factors in a degree-{degree} chain", t.len()));
            }
            for x in t {
                algebra.check_element(x)?;
            }
        }
        Ok(Self { algebra, degree, terms })
    }

    /// Chain with the given coordinates over matrix-unit tuples.
    pub fn from_coordinates(algebra: FiniteCStarAlgebra, degree: usize, coords: &[Complex64]) -> Result<Self> {
        let d = chain_dim(&algebra, degree)?;
        if coords.len() != d {
            return dim_err(format!("{} coordinates for {d} unit tuples", coords.len()));
        }
        let units = algebra.matrix_units();
        let terms = coords
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(i, &c)| {
                let t = unit_tuple(&units, degree, i).into_iter().map(|u| algebra.matrix_unit(u)).collect();
                (c, t)
            })
            .collect();
        Ok(Self { algebra, degree, terms })
    }

    pub fn algebra(&self) -> &FiniteCStarAlgebra {
        &self.algebra
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &[(Complex64, Vec<AlgebraElement>)] {
        &self.terms
    }

    pub fn coordinates(&self) -> Result<Vec<Complex64>> {
        let d = chain_dim(&self.algebra, self.degree)?;
        let mut out = vec![ZERO; d];
        for (c, t) in &self.terms {
            let mut acc = vec![*c];
            for x in t {
                let xc = x.coords();
                acc = acc.iter().flat_map(|a| xc.iter().map(move |b| a * b)).collect();
            }
            for (o, a) in out.iter_mut().zip(acc) {
                *o += a;
            }
        }
        Ok(out)
    }

    /// Coordinates of `b c`; empty in degree 0.
    pub fn boundary_coordinates(&self) -> Result<Vec<Complex64>> {
        if self.degree == 0 {
            return Ok(Vec::new());
        }
        let b = boundary_matrix(&self.algebra, self.degree)?;
        Ok(b.mul_vec(&self.coordinates()?))
    }
}

/// Matrix of the Hochschild boundary from degree `n` to `n - 1` in unit-tuple coordinates.
pub fn boundary_matrix(alg: &FiniteCStarAlgebra, n: usize) -> Result<CMatrix> {
    if n == 0 {
        return Err(Error::Domain("the boundary of a degree-0 chain is zero".into()));
    }
    let cols = chain_dim(alg, n)?;
    let rows = chain_dim(alg, n - 1)?;
    let units = alg.matrix_units();
    let index = |t: &[MatrixUnit]| t.iter().fold(0usize, |acc, &u| acc * units.len() + alg.unit_index(u));
    let mut b = CMatrix::zeros(rows, cols);
    for col in 0..cols {
        let t = unit_tuple(&units, n, col);
        for i in 0..n {
            if let Some(p) = unit_product(t[i], t[i + 1]) {
                let mut s = t[..i].to_vec();
                s.push(p);
                s.extend_from_slice(&t[i + 2..]);
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                b[(index(&s), col)] += Complex64::new(sign, 0.0);
            }
        }
        if let Some(p) = unit_product(t[n], t[0]) {
            let mut s = vec![p];
            s.extend_from_slice(&t[1..n]);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            b[(index(&s), col)] += Complex64::new(sign, 0.0);
        }
    }
    Ok(b)
}

fn form(t: &SpectralTriple, factors: &[CMatrix]) -> CMatrix {
    let mut m = factors[0].clone();
    for p in &factors[1..] {
        m = &m * &CMatrix::commutator(t.dirac(), p);
    }
    m
}

/// `pi(c) = sum coef pi(a_0)[D, pi(a_1)] ... [D, pi(a_n)]`.
pub fn evaluate_chain(t: &SpectralTriple, c: &HochschildChain) -> Result<CMatrix> {
    if c.algebra() != t.algebra() {
        return dim_err("chain and triple have different algebras");
    }
    let n = t.dim();
    let mut out = CMatrix::zeros(n, n);
    for (coef, terms) in c.terms() {
        let pis = terms.iter().map(|x| t.pi(x)).collect::<Result<Vec<_>>>()?;
        out.axpy(*coef, &form(t, &pis));
    }
    Ok(out)
}

/// Basis of `Omega_D(A)` in degrees `0..=degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct FormSpace {
    pub degree: usize,
    pub basis: Vec<CMatrix>,
}

impl FormSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    fn vectors(&self) -> Vec<Vec<Complex64>> {
        self.basis.iter().map(|m| m.as_slice().to_vec()).collect()
    }

    /// Frobenius distance from `m` to the span.
    pub fn projection_residual(&self, m: &CMatrix) -> f64 {
        distance_to_span(&self.vectors(), m.as_slice())
    }

    /// Worst projection residual of `pi(E) w` over matrix units and basis forms.
    pub fn left_closure_residual(&self, t: &SpectralTriple) -> f64 {
        let v = self.vectors();
        let mut worst = 0.0f64;
        for p in t.representation().generator_images() {
            for w in &self.basis {
                worst = worst.max(distance_to_span(&v, (&p * w).as_slice()));
            }
        }
        worst
    }
}

const SPAN_TOL: f64 = 1e-8;

pub fn omega_forms(t: &SpectralTriple, degree: usize) -> Result<FormSpace> {
    let n = t.dim();
    let gens = t.representation().generator_images();
    let comms: Vec<CMatrix> = gens.iter().map(|p| CMatrix::commutator(t.dirac(), p)).collect();
    let vecs = |ms: &[CMatrix]| ms.iter().map(|m| m.as_slice().to_vec()).collect::<Vec<_>>();
    let to_mats = |vs: Vec<Vec<Complex64>>| -> Vec<CMatrix> {
        vs.into_iter()
            .map(|v| CMatrix::from_vec(n, n, v).expect("n*n entries"))
            .collect()
    };
    let mut level = to_mats(span_basis(n * n, &vecs(&gens), SPAN_TOL)?);
    let mut all = level.clone();
    for _ in 0..degree {
        let next: Vec<CMatrix> = level.iter().flat_map(|s| comms.iter().map(move |c| s * c)).collect();
        level = to_mats(span_basis(n * n, &vecs(&next), SPAN_TOL)?);
        all.extend(level.iter().cloned());
        all = to_mats(span_basis(n * n, &vecs(&all), SPAN_TOL)?);
    }
    Ok(FormSpace { degree, basis: all })
}

fn orientation_target(t: &SpectralTriple) -> CMatrix {
    t.grading().cloned().unwrap_or_else(|| CMatrix::identity(t.dim()))
}

pub const ORIENTATION_TOL: f64 = 1e-6;

/// Hochschild cycle `c` of the given degree with `pi(c) = Gamma`
/// (`= 1` without grading), when one exists.
pub fn find_orientation_cycle(t: &SpectralTriple, degree: usize) -> Result<Option<HochschildChain>> {
    let alg = t.algebra();
    let m = chain_dim(alg, degree)?;
    let units = alg.matrix_units();
    let gens = t.representation().generator_images();
    let n = t.dim();
    let mut p = CMatrix::zeros(n * n, m);
    for col in 0..m {
        let factors: Vec<CMatrix> = unit_tuple(&units, degree, col)
            .into_iter()
            .map(|u| gens[alg.unit_index(u)].clone())
            .collect();
        p.set_column(col, form(t, &factors).as_slice());
    }
    let z = if degree == 0 {
        CMatrix::identity(m)
    } else {
        null_space(&boundary_matrix(alg, degree)?, 1e-9)?
    };
    if z.cols() == 0 {
        return Ok(None);
    }
    let target = orientation_target(t);
    let pz = &p * &z;
    let y = lstsq(&pz, target.as_slice(), 1e-10)?;
    let coords = z.mul_vec(&y);
    let achieved = p.mul_vec(&coords);
    let res = achieved
        .iter()
        .zip(target.as_slice())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if res > ORIENTATION_TOL {
        return Ok(None);
    }
    let cleaned: Vec<Complex64> = coords
        .into_iter()
        .map(|c| {
            let r = if c.re.abs() < 1e-14 { 0.0 } else { c.re };
            let i = if c.im.abs() < 1e-14 { 0.0 } else { c.im };
            Complex64::new(r, i)
        })
        .collect();
    HochschildChain::from_coordinates(alg.clone(), degree, &cleaned).map(Some)
}

/// Checks that `c` is a Hochschild cycle and that `pi(c)` is the grading
/// (the identity without one).
pub fn validate_orientability(t: &SpectralTriple, c: &HochschildChain, tol: f64) -> Result<Report> {
    let mut r = Report::new();
    let b = c.boundary_coordinates()?;
    r.push(Check::residual("cycle", b.iter().map(|z| z.norm()).fold(0.0, f64::max), tol));
    let img = evaluate_chain(t, c)?;
    let target = orientation_target(t);
    r.push(Check::residual("represents-orientation", img.max_abs_diff(&target), tol));
    Ok(r)
}
