//! Finite commutative full C*-categories realized as operator spaces,
//! their C-valued *-functors and the base spectrum.

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::error::dim_err;
use crate::numkernel::{hermitian_eig, operator_norm, span_basis};
use crate::report::{Check, Report, Status};
use crate::{CMatrix, Error, Result};

pub mod examples;


const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Eigenvalue gap separating spectral projections of the probe element.
const CLUSTER_GAP: f64 = 1e-6;
/// A compressed arrow below this relative size counts as zero.
const SUPPORT_TOL: f64 = 1e-6;

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Hom-space basis together with its dual basis, for coordinates.
#[derive(Clone, Debug, PartialEq)]
struct HomSpace {
    basis: Vec<CMatrix>,
    dual: Vec<Vec<Complex64>>,
}

impl HomSpace {
    fn new(basis: Vec<CMatrix>) -> Result<Self> {
        let n = basis.len();
        if n == 0 {
            return Ok(Self { basis, dual: Vec::new() });
        }
        let gram = CMatrix::from_fn(n, n, |j, k| basis[j].hs_inner(&basis[k]));
        let eig = hermitian_eig(&gram)?;
        let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
        // Pseudo-inverse of the Gram matrix; dependent bases get min-norm coordinates.
        let mut ginv = CMatrix::zeros(n, n);
        for (i, &l) in eig.values.iter().enumerate() {
            if l > 1e-12 * top.max(1e-300) {
                let v = eig.vectors.column(i);
                for r in 0..n {
                    for s in 0..n {
                        ginv[(r, s)] += v[r] * v[s].conj() / l;
                    }
                }
            }
        }
        let len = basis[0].as_slice().len();
        let dual = (0..n)
            .map(|j| {
                (0..len)
                    .map(|e| (0..n).map(|k| ginv[(j, k)].conj() * basis[k].as_slice()[e]).sum())
                    .collect()
            })
            .collect();
        Ok(Self { basis, dual })
    }

    fn coordinates(&self, x: &CMatrix) -> Vec<Complex64> {
        self.dual.iter().map(|d| inner(d, x.as_slice())).collect()
    }
}

/// Objects with hom-spaces `C_AB` of operators `H_B -> H_A`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteCStarCategory {
    objects: Vec<String>,
    hilbert_dims: Vec<usize>,
    homs: Vec<Vec<HomSpace>>,
}

impl FiniteCStarCategory {
    /// `homs[a][b]` lists a basis of `C_ab`, each of shape `dims[a] x dims[b]`.
    pub fn new(objects: Vec<String>, hilbert_dims: Vec<usize>, homs: Vec<Vec<Vec<CMatrix>>>) -> Result<Self> {
        let n = objects.len();
        if n == 0 {
            return Err(Error::Domain("category without objects".into()));
        }
        if hilbert_dims.len() != n || homs.len() != n || homs.iter().any(|r| r.len() != n) {
            return dim_err(format!("{n} objects need {n} dimensions and an {n}x{n} table of hom bases"));
        }
        for (i, name) in objects.iter().enumerate() {
            if objects[..i].contains(name) {
                return Err(Error::Domain(format!("duplicate object {name:?}")));
            }
        }
        if let Some(a) = hilbert_dims.iter().position(|&d| d == 0) {
            return Err(Error::Domain(format!("object {:?} has a zero Hilbert space", objects[a])));
        }
        let mut table = Vec::with_capacity(n);
        for (a, row) in homs.into_iter().enumerate() {
            let mut out = Vec::with_capacity(n);
            for (b, basis) in row.into_iter().enumerate() {
                if let Some(x) = basis.iter().find(|x| x.shape() != (hilbert_dims[a], hilbert_dims[b])) {
                    return dim_err(format!(
                        "arrow of shape {:?} in C({},{}), expected {}x{}",
                        x.shape(),
                        objects[a],
                        objects[b],
                        hilbert_dims[a],
                        hilbert_dims[b]
                    ));
                }
                out.push(HomSpace::new(basis)?);
            }
            table.push(out);
        }
        Ok(Self {
            objects,
            hilbert_dims,
            homs: table,
        })
    }

    /// One object carrying `C^n` as diagonal matrices on `C^n`.
    pub fn commutative_algebra(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("C^0 is not unital".into()));
        }
        let basis = (0..n)
            .map(|i| CMatrix::from_fn(n, n, |r, s| if r == i && s == i { ONE } else { ZERO }))
            .collect();
        Self::new(vec!["A".into()], vec![n], vec![vec![basis]])
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn object_index(&self, name: &str) -> Option<usize> {
        self.objects.iter().position(|o| o == name)
    }

    pub fn hilbert_dim(&self, a: usize) -> usize {
        self.hilbert_dims[a]
    }

    pub fn hilbert_dims(&self) -> &[usize] {
        &self.hilbert_dims
    }

    pub fn hom_basis(&self, a: usize, b: usize) -> &[CMatrix] {
        &self.homs[a][b].basis
    }

    pub fn hom_dim(&self, a: usize, b: usize) -> usize {
        self.homs[a][b].basis.len()
    }

    fn check_arrow(&self, a: usize, b: usize, x: &CMatrix) -> Result<()> {
        let n = self.num_objects();
        if a >= n || b >= n {
            return dim_err(format!("object index out of range for {n} objects"));
        }
        if x.shape() != (self.hilbert_dims[a], self.hilbert_dims[b]) {
            return dim_err(format!(
                "arrow of shape {:?}, expected {}x{}",
                x.shape(),
                self.hilbert_dims[a],
                self.hilbert_dims[b]
            ));
        }
        Ok(())
    }

    /// Coordinates of the orthogonal projection of `x` onto `C_ab`.
    pub fn coordinates(&self, a: usize, b: usize, x: &CMatrix) -> Result<Vec<Complex64>> {
        self.check_arrow(a, b, x)?;
        Ok(self.homs[a][b].coordinates(x))
    }

    pub fn element(&self, a: usize, b: usize, coords: &[Complex64]) -> Result<CMatrix> {
        let basis = self.hom_basis(a, b);
        if coords.len() != basis.len() {
            return dim_err(format!("{} coordinates for a {}-dimensional hom-space", coords.len(), basis.len()));
        }
        let mut x = CMatrix::zeros(self.hilbert_dims[a], self.hilbert_dims[b]);
        for (z, m) in coords.iter().zip(basis) {
            x.axpy(*z, m);
        }
        Ok(x)
    }

    /// Frobenius distance from `x` to `C_ab`.
    pub fn hom_residual(&self, a: usize, b: usize, x: &CMatrix) -> Result<f64> {
        let coords = self.coordinates(a, b, x)?;
        Ok((x - &self.element(a, b, &coords)?).frobenius_norm())
    }

    /// Conjugates every hom-space by object-wise unitaries, `x -> W_a x W_b^*`.
    pub fn conjugate(&self, unitaries: &[CMatrix]) -> Result<Self> {
        let n = self.num_objects();
        if unitaries.len() != n {
            return dim_err(format!("{} unitaries for {n} objects", unitaries.len()));
        }
        for (a, w) in unitaries.iter().enumerate() {
            if w.shape() != (self.hilbert_dims[a], self.hilbert_dims[a]) || !w.is_unitary(1e-9) {
                return Err(Error::Domain(format!("unitary for object {:?} is invalid", self.objects[a])));
            }
        }
        let homs = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        self.hom_basis(a, b)
                            .iter()
                            .map(|x| &(&unitaries[a] * x) * &unitaries[b].adjoint())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self::new(self.objects.clone(), self.hilbert_dims.clone(), homs)
    }

    /// Reorders objects: object `i` of the result is object `order[i]` here.
    pub fn reorder_objects(&self, order: &[usize]) -> Result<Self> {
        let n = self.num_objects();
        if !is_permutation(order, n) {
            return Err(Error::Domain(format!("{order:?} is not a permutation of {n} objects")));
        }
        let homs = order
            .iter()
            .map(|&a| order.iter().map(|&b| self.hom_basis(a, b).to_vec()).collect())
            .collect();
        Self::new(
            order.iter().map(|&a| self.objects[a].clone()).collect(),
            order.iter().map(|&a| self.hilbert_dims[a]).collect(),
            homs,
        )
    }
}

pub(crate) fn is_permutation(p: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    p.len() == n && p.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
}

/// Deterministic pseudo-random element of `C_ab`, used as a probe.
fn probe(c: &FiniteCStarCategory, a: usize, b: usize, salt: usize) -> CMatrix {
    let coords: Vec<Complex64> = (0..c.hom_dim(a, b))
        .map(|k| {
            let t = (k + 3 * salt) as f64;
            Complex64::new((1.1 + 2.3 * t).cos(), (0.4 + 1.7 * t).sin())
        })
        .collect();
    c.element(a, b, &coords).expect("coordinate count matches")
}

/// Closure, commutativity, fullness and the C*-identity.
pub fn validate_category(c: &FiniteCStarCategory, tol: f64) -> Report {
    let n = c.num_objects();
    let name = |a: usize, b: usize| format!("({},{})", c.objects[a], c.objects[b]);
    let mut report = Report::new();

    let mut dependent = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let vecs: Vec<Vec<Complex64>> = c.hom_basis(a, b).iter().map(|x| x.as_slice().to_vec()).collect();
            let r = span_basis(c.hilbert_dims[a] * c.hilbert_dims[b], &vecs, 1e-10).map(|s| s.len());
            if r.map_or(true, |r| r != vecs.len()) {
                dependent.push(name(a, b));
            }
        }
    }
    report.push(if dependent.is_empty() {
        Check::new("independence", Status::Pass, "")
    } else {
        Check::new("independence", Status::Fail, format!("dependent bases at {}", dependent.join(" ")))
    });

    let mut worst = (0.0f64, String::new());
    for a in 0..n {
        for b in 0..n {
            for cc in 0..n {
                for x in c.hom_basis(a, b) {
                    for y in c.hom_basis(b, cc) {
                        let r = c.hom_residual(a, cc, &(x * y)).unwrap_or(f64::INFINITY);
                        if r > worst.0 {
                            worst = (r, format!("{}.{}", name(a, b), name(b, cc)));
                        }
                    }
                }
            }
        }
    }
    report.push(Check::residual("composition-closure", worst.0, tol).with_detail(worst.1));

    let mut worst = (0.0f64, String::new());
    for a in 0..n {
        for b in 0..n {
            for x in c.hom_basis(a, b) {
                let r = c.hom_residual(b, a, &x.adjoint()).unwrap_or(f64::INFINITY);
                if r > worst.0 {
                    worst = (r, name(a, b));
                }
            }
        }
    }
    report.push(Check::residual("involution-closure", worst.0, tol).with_detail(worst.1));

    let mut worst = (0.0f64, String::new());
    for a in 0..n {
        let r = c
            .hom_residual(a, a, &CMatrix::identity(c.hilbert_dims[a]))
            .unwrap_or(f64::INFINITY);
        if r > worst.0 {
            worst = (r, c.objects[a].clone());
        }
    }
    report.push(Check::residual("identities", worst.0, tol).with_detail(worst.1));

    let mut worst = (0.0f64, String::new());
    for a in 0..n {
        let basis = c.hom_basis(a, a);
        for (i, x) in basis.iter().enumerate() {
            for y in &basis[i + 1..] {
                let r = CMatrix::commutator(x, y).frobenius_norm();
                if r > worst.0 {
                    worst = (r, c.objects[a].clone());
                }
            }
        }
    }
    report.push(Check::residual("diagonal-commutativity", worst.0, tol).with_detail(worst.1));

    let mut worst = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            if c.hom_dim(a, b) == 0 {
                continue;
            }
            for salt in 0..2 {
                let x = probe(c, a, b, salt);
                let r = match (operator_norm(&x), operator_norm(&(&x.adjoint() * &x))) {
                    (Ok(nx), Ok(nxx)) => (nxx - nx * nx).abs() / (nx * nx).max(1.0),
                    _ => f64::INFINITY,
                };
                worst = worst.max(r);
            }
        }
    }
    report.push(Check::residual("c-star-identity", worst, tol));

    let mut not_full = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let basis = c.hom_basis(a, b);
            let mut products = Vec::new();
            for x in basis {
                for y in basis {
                    products.push((&x.adjoint() * y).into_vec());
                }
            }
            let d = c.hilbert_dims[b];
            let r = span_basis(d * d, &products, 1e-9).map(|s| s.len()).unwrap_or(0);
            if r < c.hom_dim(b, b) || c.hom_dim(b, b) == 0 {
                not_full.push(name(a, b));
            }
        }
    }
    report.push(if not_full.is_empty() {
        Check::new("fullness", Status::Pass, "")
    } else {
        Check::new(
            "fullness",
            Status::Fail,
            format!("C_AB^* C_AB does not span C_BB at {}", not_full.join(" ")),
        )
    });
    report
}

/// Character of a diagonal algebra `C_aa`, `x -> tr(P x) / tr(P)` for a
/// minimal projection `P`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalCharacter {
    pub object: usize,
    pub projection: CMatrix,
}

impl DiagonalCharacter {
    pub fn eval(&self, x: &CMatrix) -> Complex64 {
        (&self.projection * x).trace() / self.projection.trace().re
    }
}

/// Compatible family of diagonal characters: `characters[a]` indexes the
/// characters of object `a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseSpectrumPoint {
    pub characters: Vec<usize>,
}

/// Values of a C-valued *-functor: `values[a][b][k]` on basis arrow `k` of `C_ab`.
#[derive(Clone, Debug, PartialEq)]
pub struct StarFunctor {
    values: Vec<Vec<Vec<Complex64>>>,
}

impl StarFunctor {
    pub fn new(values: Vec<Vec<Vec<Complex64>>>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[Vec<Vec<Complex64>>] {
        &self.values
    }

    pub fn value(&self, a: usize, b: usize, k: usize) -> Complex64 {
        self.values[a][b][k]
    }

    /// Value on an arbitrary arrow, through its coordinates.
    pub fn eval(&self, c: &FiniteCStarCategory, a: usize, b: usize, x: &CMatrix) -> Result<Complex64> {
        let coords = c.coordinates(a, b, x)?;
        Ok(coords.iter().zip(&self.values[a][b]).map(|(z, w)| z * w).sum())
    }

    fn check_shape(&self, c: &FiniteCStarCategory) -> Result<()> {
        let n = c.num_objects();
        let ok = self.values.len() == n
            && (0..n).all(|a| self.values[a].len() == n && (0..n).all(|b| self.values[a][b].len() == c.hom_dim(a, b)));
        if ok {
            Ok(())
        } else {
            dim_err("functor values do not match the hom-space dimensions")
        }
    }
}

/// Multiplicativity, involutivity and unitality of `w` on basis arrows.
pub fn check_star_functor(c: &FiniteCStarCategory, w: &StarFunctor, tol: f64) -> Result<Report> {
    w.check_shape(c)?;
    let n = c.num_objects();
    let (mut mult, mut inv, mut unit) = (0.0f64, 0.0f64, 0.0f64);
    for a in 0..n {
        unit = unit.max((w.eval(c, a, a, &CMatrix::identity(c.hilbert_dims[a]))? - ONE).norm());
        for b in 0..n {
            for (k, x) in c.hom_basis(a, b).iter().enumerate() {
                let wx = w.value(a, b, k);
                inv = inv.max((w.eval(c, b, a, &x.adjoint())? - wx.conj()).norm());
                for cc in 0..n {
                    for (l, y) in c.hom_basis(b, cc).iter().enumerate() {
                        let r = (w.eval(c, a, cc, &(x * y))? - wx * w.value(b, cc, l)).norm();
                        mult = mult.max(r);
                    }
                }
            }
        }
    }
    let mut report = Report::new();
    report.push(Check::residual("multiplicative", mult, tol));
    report.push(Check::residual("involutive", inv, tol));
    report.push(Check::residual("unital", unit, tol));
    Ok(report)
}

/// Diagonal characters, base points and the tree generators used to build
/// canonical functors.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseSpectrum {
    pub characters: Vec<Vec<DiagonalCharacter>>,
    pub points: Vec<BaseSpectrumPoint>,
    /// `generators[p][a]` in `C_{0a}` with `chi_0(v v^*) = 1`; the identity for `a = 0`.
    generators: Vec<Vec<CMatrix>>,
}

impl BaseSpectrum {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Generator of the tree edge from the least object to `a` at point `p`.
    pub fn generator(&self, p: usize, a: usize) -> &CMatrix {
        &self.generators[p][a]
    }

    /// The *-functor at point `p` with phase `phases[a - 1]` on the tree edge to `a`.
    pub fn functor(&self, c: &FiniteCStarCategory, p: usize, phases: &[Complex64]) -> Result<StarFunctor> {
        let n = c.num_objects();
        if p >= self.len() {
            return dim_err(format!("point {p} out of range for {} points", self.len()));
        }
        if phases.len() + 1 != n {
            return dim_err(format!("{} tree phases for {n} objects", phases.len()));
        }
        if let Some(z) = phases.iter().find(|z| (z.norm() - 1.0).abs() > 1e-9) {
            return Err(Error::Domain(format!("tree phase {z} is not of unit modulus")));
        }
        let theta: Vec<Complex64> = std::iter::once(ONE).chain(phases.iter().copied()).collect();
        let chi = &self.characters[0][self.points[p].characters[0]];
        let v = &self.generators[p];
        let values = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let scale = theta[a].conj() * theta[b];
                        let left = &v[a];
                        let right = v[b].adjoint();
                        c.hom_basis(a, b)
                            .iter()
                            .map(|y| scale * chi.eval(&(&(left * y) * &right)))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(StarFunctor { values })
    }

    /// Canonical representative at `p`: all tree phases equal to one.
    pub fn canonical(&self, c: &FiniteCStarCategory, p: usize) -> Result<StarFunctor> {
        self.functor(c, p, &vec![ONE; c.num_objects() - 1])
    }

    /// The point whose diagonal characters agree with `w`, if any.
    pub fn classify(&self, c: &FiniteCStarCategory, w: &StarFunctor, tol: f64) -> Result<Option<usize>> {
        w.check_shape(c)?;
        for (p, point) in self.points.iter().enumerate() {
            let mut agree = true;
            'objects: for a in 0..c.num_objects() {
                let chi = &self.characters[a][point.characters[a]];
                for (k, x) in c.hom_basis(a, a).iter().enumerate() {
                    if (chi.eval(x) - w.value(a, a, k)).norm() > tol {
                        agree = false;
                        break 'objects;
                    }
                }
            }
            if agree {
                return Ok(Some(p));
            }
        }
        Ok(None)
    }
}

fn require_commutative_full(c: &FiniteCStarCategory) -> Result<()> {
    let report = validate_category(c, 1e-8);
    if report.passed() {
        return Ok(());
    }
    let failed: Vec<String> = report
        .failures()
        .map(|f| {
            if f.detail.is_empty() {
                f.name.clone()
            } else {
                format!("{} ({})", f.name, f.detail)
            }
        })
        .collect();
    Err(Error::Precondition(format!(
        "category is not a commutative full C*-category: {}",
        failed.join(", ")
    )))
}

fn lex_desc(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > 1e-9 {
            return y.partial_cmp(x).unwrap_or(Ordering::Equal);
        }
    }
    Ordering::Equal
}

/// Minimal projections of `C_aa`, ordered by their diagonals, lexicographically descending.
fn diagonal_characters(c: &FiniteCStarCategory, a: usize) -> Result<Vec<DiagonalCharacter>> {
    let basis = c.hom_basis(a, a);
    let d = c.hilbert_dims[a];
    let want = basis.len();
    for attempt in 0..4 {
        let mut h = CMatrix::zeros(d, d);
        for (k, x) in basis.iter().enumerate() {
            let t = k as f64 + 0.618 * attempt as f64;
            let xs = x.adjoint();
            h.axpy(Complex64::new((0.9 + 2.3 * t).cos(), 0.0), &(x + &xs));
            h.axpy(Complex64::new(0.0, (0.3 + 1.9 * t).sin()), &(x - &xs));
        }
        let eig = hermitian_eig(&h)?;
        let scale = eig.values.iter().fold(1.0f64, |m, l| m.max(l.abs()));
        let mut clusters: Vec<Vec<usize>> = vec![vec![0]];
        for i in 1..d {
            if eig.values[i] - eig.values[i - 1] > CLUSTER_GAP * scale {
                clusters.push(Vec::new());
            }
            clusters.last_mut().expect("nonempty").push(i);
        }
        if clusters.len() != want {
            continue;
        }
        let mut chars = Vec::with_capacity(want);
        for cl in clusters {
            let mut p = CMatrix::zeros(d, d);
            for i in cl {
                let v = eig.vectors.column(i);
                for r in 0..d {
                    for s in 0..d {
                        p[(r, s)] += v[r] * v[s].conj();
                    }
                }
            }
            if c.hom_residual(a, a, &p)? > 1e-6 {
                return Err(Error::Contract(format!(
                    "spectral projection of the diagonal at {:?} lies outside C_AA",
                    c.objects[a]
                )));
            }
            chars.push(DiagonalCharacter { object: a, projection: p });
        }
        chars.sort_by(|x, y| {
            let dx: Vec<f64> = (0..d).map(|i| x.projection[(i, i)].re).collect();
            let dy: Vec<f64> = (0..d).map(|i| y.projection[(i, i)].re).collect();
            lex_desc(&dx, &dy)
        });
        return Ok(chars);
    }
    Err(Error::Contract(format!(
        "could not separate {want} characters of the diagonal at {:?}",
        c.objects[a]
    )))
}

/// Compatible families of diagonal characters; all diagonals must share
/// the same number of characters.
pub fn base_spectrum(c: &FiniteCStarCategory) -> Result<BaseSpectrum> {
    require_commutative_full(c)?;
    let n = c.num_objects();
    let characters: Vec<Vec<DiagonalCharacter>> = (0..n).map(|a| diagonal_characters(c, a)).collect::<Result<_>>()?;
    let m = characters[0].len();
    if let Some(a) = (0..n).find(|&a| characters[a].len() != m) {
        return Err(Error::Contract(format!(
            "diagonals at {:?} and {:?} have {} and {} characters",
            c.objects[0],
            c.objects[a],
            m,
            characters[a].len()
        )));
    }
    let mut points: Vec<BaseSpectrumPoint> = (0..m).map(|i| BaseSpectrumPoint { characters: vec![i; n] }).collect();
    for b in 1..n {
        let mut used = vec![false; m];
        for (i, point) in points.iter_mut().enumerate() {
            let p0 = &characters[0][i].projection;
            let weights: Vec<f64> = characters[b]
                .iter()
                .map(|chi| {
                    c.hom_basis(0, b)
                        .iter()
                        .map(|x| (&(p0 * x) * &chi.projection).frobenius_norm() / x.frobenius_norm().max(1e-300))
                        .fold(0.0, f64::max)
                })
                .collect();
            let hits: Vec<usize> = (0..m).filter(|&j| weights[j] > SUPPORT_TOL).collect();
            match hits.as_slice() {
                [j] if !used[*j] => {
                    used[*j] = true;
                    point.characters[b] = *j;
                }
                _ => {
                    return Err(Error::Contract(format!(
                        "character {i} at {:?} does not match exactly one character at {:?}",
                        c.objects[0], c.objects[b]
                    )))
                }
            }
        }
    }
    let generators = points
        .iter()
        .map(|point| {
            let chi0 = &characters[0][point.characters[0]];
            (0..n)
                .map(|a| {
                    if a == 0 {
                        return Ok(CMatrix::identity(c.hilbert_dims[0]));
                    }
                    let (w, x) = c
                        .hom_basis(0, a)
                        .iter()
                        .map(|x| (chi0.eval(&(x * &x.adjoint())).re, x))
                        .max_by(|s, t| s.0.total_cmp(&t.0))
                        .ok_or_else(|| Error::Contract("empty off-diagonal hom-space".into()))?;
                    if w <= SUPPORT_TOL * SUPPORT_TOL {
                        return Err(Error::Contract(format!("no arrow to {:?} is supported at this point", c.objects[a])));
                    }
                    Ok(x.scale_real(1.0 / w.sqrt()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BaseSpectrum {
        characters,
        points,
        generators,
    })
}

/// Canonical representative (tree phases one) at every base point.
pub fn enumerate_star_functors(c: &FiniteCStarCategory) -> Result<Vec<StarFunctor>> {
    let spec = base_spectrum(c)?;
    (0..spec.len()).map(|p| spec.canonical(c, p)).collect()
}

/// Every functor whose tree phases are `order`-th roots of unity, grouped by
/// base point; `order = 1` gives [`enumerate_star_functors`].
pub fn enumerate_star_functors_with_phases(c: &FiniteCStarCategory, order: usize) -> Result<Vec<StarFunctor>> {
    if order == 0 {
        return Err(Error::Domain("phase order must be positive".into()));
    }
    let spec = base_spectrum(c)?;
    let edges = c.num_objects() - 1;
    let count = (order as u64).checked_pow(edges as u32).unwrap_or(u64::MAX);
    if count.saturating_mul(spec.len() as u64) > 100_000 {
        return Err(Error::Refused(format!("{count} phase assignments per point")));
    }
    let roots: Vec<Complex64> = (0..order)
        .map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / order as f64))
        .collect();
    let mut out = Vec::new();
    for p in 0..spec.len() {
        for mut idx in 0..count {
            let mut phases = Vec::with_capacity(edges);
            for _ in 0..edges {
                phases.push(roots[(idx % order as u64) as usize]);
                idx /= order as u64;
            }
            out.push(spec.functor(c, p, &phases)?);
        }
    }
    Ok(out)
}

/// Phases `l` with `w2(y) = l_a w1(y) conj(l_b)` on every basis arrow
/// `y` of `C_ab`, normalized so that `l_0 = 1`; `None` if there are none.
pub fn equivalence_phases(
    c: &FiniteCStarCategory,
    w1: &StarFunctor,
    w2: &StarFunctor,
    tol: f64,
) -> Result<Option<Vec<Complex64>>> {
    w1.check_shape(c)?;
    w2.check_shape(c)?;
    let n = c.num_objects();
    let mut phases = vec![ONE];
    for a in 1..n {
        let best = (0..c.hom_dim(0, a)).max_by(|&k, &l| w1.value(0, a, k).norm().total_cmp(&w1.value(0, a, l).norm()));
        let Some(k) = best else { return Ok(None) };
        let (x, y) = (w1.value(0, a, k), w2.value(0, a, k));
        if x.norm() <= tol || y.norm() <= tol {
            return Ok(None);
        }
        // w2(v) = conj(l_a) w1(v) for v in C_0a.
        phases.push((x / x.norm()) * (y / y.norm()).conj());
    }
    for a in 0..n {
        for b in 0..n {
            for k in 0..c.hom_dim(a, b) {
                let lhs = w2.value(a, b, k);
                let rhs = phases[a] * w1.value(a, b, k) * phases[b].conj();
                if (lhs - rhs).norm() > tol {
                    return Ok(None);
                }
            }
        }
    }
    Ok(Some(phases))
}

/// Linear *-functor between operator categories, stored as coordinate maps
/// `C_ab -> D_{f(a) f(b)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CStarFunctor {
    source: FiniteCStarCategory,
    target: FiniteCStarCategory,
    object_map: Vec<usize>,
    hom_maps: Vec<Vec<CMatrix>>,
}

impl CStarFunctor {
    pub fn new(
        source: FiniteCStarCategory,
        target: FiniteCStarCategory,
        object_map: Vec<usize>,
        hom_maps: Vec<Vec<CMatrix>>,
    ) -> Result<Self> {
        let n = source.num_objects();
        if object_map.len() != n || object_map.iter().any(|&t| t >= target.num_objects()) {
            return dim_err("object map does not match the categories");
        }
        if hom_maps.len() != n || hom_maps.iter().any(|r| r.len() != n) {
            return dim_err(format!("expected an {n}x{n} table of hom maps"));
        }
        for a in 0..n {
            for b in 0..n {
                let want = (target.hom_dim(object_map[a], object_map[b]), source.hom_dim(a, b));
                if hom_maps[a][b].shape() != want {
                    return dim_err(format!("hom map {a},{b} has shape {:?}, expected {want:?}", hom_maps[a][b].shape()));
                }
            }
        }
        Ok(Self {
            source,
            target,
            object_map,
            hom_maps,
        })
    }

    /// Builds the coordinate maps from the images of the basis arrows,
    /// rejecting images outside the target hom-spaces.
    pub fn from_images(
        source: FiniteCStarCategory,
        target: FiniteCStarCategory,
        object_map: Vec<usize>,
        images: &[Vec<Vec<CMatrix>>],
        tol: f64,
    ) -> Result<Self> {
        let n = source.num_objects();
        if object_map.len() != n || object_map.iter().any(|&t| t >= target.num_objects()) {
            return dim_err("object map does not match the categories");
        }
        let mut maps = Vec::with_capacity(n);
        for a in 0..n {
            let mut row = Vec::with_capacity(n);
            for b in 0..n {
                let (fa, fb) = (object_map[a], object_map[b]);
                let imgs = &images[a][b];
                if imgs.len() != source.hom_dim(a, b) {
                    return dim_err(format!("{} images for a {}-dimensional hom-space", imgs.len(), source.hom_dim(a, b)));
                }
                let mut m = CMatrix::zeros(target.hom_dim(fa, fb), imgs.len());
                for (k, y) in imgs.iter().enumerate() {
                    let r = target.hom_residual(fa, fb, y)?;
                    if r > tol {
                        return Err(Error::Domain(format!(
                            "image of basis arrow {k} of ({},{}) is {r:.3e} away from the target hom-space",
                            source.objects[a], source.objects[b]
                        )));
                    }
                    m.set_column(k, &target.coordinates(fa, fb, y)?);
                }
                row.push(m);
            }
            maps.push(row);
        }
        Self::new(source, target, object_map, maps)
    }

    pub fn identity(c: &FiniteCStarCategory) -> Self {
        let n = c.num_objects();
        let maps = (0..n)
            .map(|a| (0..n).map(|b| CMatrix::identity(c.hom_dim(a, b))).collect())
            .collect();
        Self {
            source: c.clone(),
            target: c.clone(),
            object_map: (0..n).collect(),
            hom_maps: maps,
        }
    }

    /// `x -> W_a x W_b^*` onto the conjugated category.
    pub fn conjugation(c: &FiniteCStarCategory, unitaries: &[CMatrix]) -> Result<Self> {
        let target = c.conjugate(unitaries)?;
        let mut f = Self::identity(c);
        f.target = target;
        Ok(f)
    }

    /// Relabelling onto `c.reorder_objects(order)`.
    pub fn reordering(c: &FiniteCStarCategory, order: &[usize]) -> Result<Self> {
        let target = c.reorder_objects(order)?;
        let n = c.num_objects();
        let mut object_map = vec![0; n];
        for (i, &a) in order.iter().enumerate() {
            object_map[a] = i;
        }
        let maps = (0..n)
            .map(|a| (0..n).map(|b| CMatrix::identity(c.hom_dim(a, b))).collect())
            .collect();
        Self::new(c.clone(), target, object_map, maps)
    }

    pub fn source(&self) -> &FiniteCStarCategory {
        &self.source
    }

    pub fn target(&self) -> &FiniteCStarCategory {
        &self.target
    }

    pub fn object_map(&self) -> &[usize] {
        &self.object_map
    }

    pub fn hom_map(&self, a: usize, b: usize) -> &CMatrix {
        &self.hom_maps[a][b]
    }

    pub fn is_object_bijective(&self) -> bool {
        is_permutation(&self.object_map, self.target.num_objects())
    }

    /// Image of an arrow `x` of `C_ab`.
    pub fn apply(&self, a: usize, b: usize, x: &CMatrix) -> Result<CMatrix> {
        let coords = self.source.coordinates(a, b, x)?;
        let image = self.hom_maps[a][b].mul_vec(&coords);
        self.target.element(self.object_map[a], self.object_map[b], &image)
    }

    /// `self o first`.
    pub fn compose(&self, first: &CStarFunctor) -> Result<CStarFunctor> {
        if first.target != self.source {
            return Err(Error::Contract("functors are not composable".into()));
        }
        let n = first.source.num_objects();
        let maps = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let (fa, fb) = (first.object_map[a], first.object_map[b]);
                        &self.hom_maps[fa][fb] * &first.hom_maps[a][b]
                    })
                    .collect()
            })
            .collect();
        Self::new(
            first.source.clone(),
            self.target.clone(),
            first.object_map.iter().map(|&fa| self.object_map[fa]).collect(),
            maps,
        )
    }

    /// Multiplicativity, involutivity and unitality on basis arrows.
    pub fn check(&self, tol: f64) -> Result<Report> {
        let (s, f) = (&self.source, &self.object_map);
        let n = s.num_objects();
        let (mut mult, mut inv, mut unit) = (0.0f64, 0.0f64, 0.0f64);
        for a in 0..n {
            let id = self.apply(a, a, &CMatrix::identity(s.hilbert_dims[a]))?;
            unit = unit.max((&id - &CMatrix::identity(self.target.hilbert_dims[f[a]])).max_abs());
            for b in 0..n {
                for x in s.hom_basis(a, b) {
                    let fx = self.apply(a, b, x)?;
                    inv = inv.max((&self.apply(b, a, &x.adjoint())? - &fx.adjoint()).max_abs());
                    for cc in 0..n {
                        for y in s.hom_basis(b, cc) {
                            let lhs = self.apply(a, cc, &(x * y))?;
                            let rhs = &fx * &self.apply(b, cc, y)?;
                            mult = mult.max((&lhs - &rhs).max_abs());
                        }
                    }
                }
            }
        }
        let mut report = Report::new();
        report.push(Check::residual("multiplicative", mult, tol));
        report.push(Check::residual("involutive", inv, tol));
        report.push(Check::residual("unital", unit, tol));
        Ok(report)
    }

    /// Largest entry difference between coordinate maps; infinite if the
    /// object maps differ.
    pub fn distance(&self, other: &CStarFunctor) -> f64 {
        if self.object_map != other.object_map || self.source != other.source || self.target != other.target {
            return f64::INFINITY;
        }
        self.hom_maps
            .iter()
            .flatten()
            .zip(other.hom_maps.iter().flatten())
            .map(|(p, q)| p.max_abs_diff(q))
            .fold(0.0, f64::max)
    }
}
