//! Hilbert bimodules over commutative finite algebras, imprimitivity and its
//! spectral decomposition, and finite Serre-Swan / Takahashi correspondences.

use num_complex::Complex64;

use crate::algebra::{AlgebraHomomorphism, FiniteCStarAlgebra};
use crate::error::{dim_err, Error, Result};
use crate::numkernel::{hermitian_eig, kron, span_basis};
use crate::report::{Check, Report};
use crate::CMatrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// One summand `e_i M e_j`, a Hilbert space of dimension `dim` whose inner
/// product is `<u, v> = v^* gram u` on coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub dim: usize,
    pub gram: CMatrix,
}

impl Component {
    fn empty() -> Self {
        Self {
            dim: 0,
            gram: CMatrix::zeros(0, 0),
        }
    }
}

/// Bimodule over `C^left` (acting on the left) and `C^right` (on the right),
/// stored as the grid of its components `e_i M e_j`.
///
/// Elements are coordinate vectors ordered by component `(i, j)`, `i` major,
/// then by the coordinate inside the component.
#[derive(Clone, Debug, PartialEq)]
pub struct HilbertBimodule {
    left: usize,
    right: usize,
    comps: Vec<Component>,
}

/// Position of a basis vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasisIndex {
    pub i: usize,
    pub j: usize,
    pub alpha: usize,
}

impl HilbertBimodule {
    /// Components given as `(i, j, gram)`; unlisted components are zero.
    pub fn new(left: usize, right: usize, components: Vec<(usize, usize, CMatrix)>) -> Result<Self> {
        if left == 0 || right == 0 {
            return Err(Error::Domain("bimodule algebras need at least one point".into()));
        }
        let mut comps = vec![Component::empty(); left * right];
        for (i, j, gram) in components {
            if i >= left || j >= right {
                return dim_err(format!("component ({i}, {j}) outside a {left}x{right} grid"));
            }
            if !gram.is_square() {
                return dim_err(format!("Gram matrix of component ({i}, {j}) is not square"));
            }
            if gram.rows() > 0 {
                let res = gram.hermitian_residual();
                if res > 1e-9 * (1.0 + gram.max_abs()) {
                    return Err(Error::Domain(format!("Gram matrix of ({i}, {j}) is not Hermitian")));
                }
                let low = hermitian_eig(&gram)?.values[0];
                if low <= 1e-12 * (1.0 + gram.max_abs()) {
                    return Err(Error::Domain(format!(
                        "Gram matrix of ({i}, {j}) is not positive definite (eigenvalue {low})"
                    )));
                }
            }
            let slot = &mut comps[i * right + j];
            if slot.dim != 0 {
                return Err(Error::Domain(format!("component ({i}, {j}) listed twice")));
            }
            *slot = Component {
                dim: gram.rows(),
                gram,
            };
        }
        Ok(Self { left, right, comps })
    }

    /// Orthonormal components with the given dimensions, `dims[i][j]`.
    pub fn from_dims(dims: &[Vec<usize>]) -> Result<Self> {
        let left = dims.len();
        let right = dims.first().map_or(0, Vec::len);
        if dims.iter().any(|r| r.len() != right) {
            return dim_err("ragged dimension grid");
        }
        let comps = (0..left)
            .flat_map(|i| (0..right).map(move |j| (i, j)))
            .filter(|&(i, j)| dims[i][j] > 0)
            .map(|(i, j)| (i, j, CMatrix::identity(dims[i][j])))
            .collect();
        Self::new(left, right, comps)
    }

    /// `C^n` as a bimodule over itself.
    pub fn identity(n: usize) -> Result<Self> {
        Self::new(n, n, (0..n).map(|i| (i, i, CMatrix::identity(1))).collect())
    }

    /// Line bimodule supported on the graph of `sigma`; the basis vector of
    /// component `(i, sigma(i))` has norm `|weights[i]|`.
    pub fn permutation_line(sigma: &[usize], weights: &[Complex64]) -> Result<Self> {
        let n = sigma.len();
        if weights.len() != n {
            return dim_err(format!("{} weights for {n} points", weights.len()));
        }
        let mut seen = vec![false; n];
        for &s in sigma {
            if s >= n || seen[s] {
                return Err(Error::Domain(format!("{sigma:?} is not a permutation")));
            }
            seen[s] = true;
        }
        Self::new(
            n,
            n,
            (0..n)
                .map(|i| (i, sigma[i], CMatrix::diagonal(&[Complex64::new(weights[i].norm_sqr(), 0.0)])))
                .collect(),
        )
    }

    pub fn left_points(&self) -> usize {
        self.left
    }

    pub fn right_points(&self) -> usize {
        self.right
    }

    pub fn left_algebra(&self) -> FiniteCStarAlgebra {
        FiniteCStarAlgebra::commutative(self.left).expect("nonempty")
    }

    pub fn right_algebra(&self) -> FiniteCStarAlgebra {
        FiniteCStarAlgebra::commutative(self.right).expect("nonempty")
    }

    pub fn component(&self, i: usize, j: usize) -> &Component {
        &self.comps[i * self.right + j]
    }

    pub fn dim(&self) -> usize {
        self.comps.iter().map(|c| c.dim).sum()
    }

    pub fn offset(&self, i: usize, j: usize) -> usize {
        self.comps[..i * self.right + j].iter().map(|c| c.dim).sum()
    }

    pub fn basis(&self) -> Vec<BasisIndex> {
        let mut out = Vec::with_capacity(self.dim());
        for i in 0..self.left {
            for j in 0..self.right {
                for alpha in 0..self.component(i, j).dim {
                    out.push(BasisIndex { i, j, alpha });
                }
            }
        }
        out
    }

    /// Gram matrix of the whole space: block diagonal over components.
    pub fn total_gram(&self) -> CMatrix {
        let n = self.dim();
        let mut g = CMatrix::zeros(n, n);
        for i in 0..self.left {
            for j in 0..self.right {
                let c = self.component(i, j);
                if c.dim > 0 {
                    let o = self.offset(i, j);
                    g.set_submatrix(o, o, &c.gram);
                }
            }
        }
        g
    }

    fn check_vec(&self, x: &[Complex64]) -> Result<()> {
        if x.len() != self.dim() {
            return dim_err(format!("vector of length {} in a bimodule of dimension {}", x.len(), self.dim()));
        }
        Ok(())
    }

    pub fn unit_vector(&self, b: BasisIndex) -> Vec<Complex64> {
        let mut v = vec![ZERO; self.dim()];
        v[self.offset(b.i, b.j) + b.alpha] = ONE;
        v
    }

    /// `a . x` for `a` given by its values on the left points.
    pub fn left_act(&self, a: &[Complex64], x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_vec(x)?;
        if a.len() != self.left {
            return dim_err("left scalar has wrong length");
        }
        let mut out = x.to_vec();
        for b in self.basis() {
            out[self.offset(b.i, b.j) + b.alpha] *= a[b.i];
        }
        Ok(out)
    }

    /// `x . b` for `b` given by its values on the right points.
    pub fn right_act(&self, x: &[Complex64], b: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_vec(x)?;
        if b.len() != self.right {
            return dim_err("right scalar has wrong length");
        }
        let mut out = x.to_vec();
        for e in self.basis() {
            out[self.offset(e.i, e.j) + e.alpha] *= b[e.j];
        }
        Ok(out)
    }

    fn component_inner(&self, i: usize, j: usize, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        // <x, y> with `x` in the conjugate-linear slot.
        let c = self.component(i, j);
        let o = self.offset(i, j);
        let mut s = ZERO;
        for a in 0..c.dim {
            for b in 0..c.dim {
                s += x[o + a].conj() * c.gram[(a, b)] * y[o + b];
            }
        }
        s
    }

    /// Left inner product, linear in `x`: `A<x, y>_i = sum_j <y_ij, x_ij>`.
    pub fn left_inner(&self, x: &[Complex64], y: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_vec(x)?;
        self.check_vec(y)?;
        Ok((0..self.left)
            .map(|i| (0..self.right).map(|j| self.component_inner(i, j, y, x)).sum())
            .collect())
    }

    /// Right inner product, linear in `y`: `<x, y>_B,j = sum_i <x_ij, y_ij>`.
    pub fn right_inner(&self, x: &[Complex64], y: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_vec(x)?;
        self.check_vec(y)?;
        Ok((0..self.right)
            .map(|j| (0..self.left).map(|i| self.component_inner(i, j, x, y)).sum())
            .collect())
    }

    fn inner_span_rank(&self, left: bool) -> usize {
        let basis = self.basis();
        let len = if left { self.left } else { self.right };
        let mut values = Vec::new();
        for &x in &basis {
            for &y in &basis {
                let (ux, uy) = (self.unit_vector(x), self.unit_vector(y));
                let v = if left {
                    self.left_inner(&ux, &uy)
                } else {
                    self.right_inner(&ux, &uy)
                };
                values.push(v.expect("basis vectors"));
            }
        }
        span_basis(len, &values, 1e-8).map(|b| b.len()).unwrap_or(0)
    }

    /// The left inner products span `C^left`.
    pub fn is_full_left(&self) -> bool {
        self.inner_span_rank(true) == self.left
    }

    pub fn is_full_right(&self) -> bool {
        self.inner_span_rank(false) == self.right
    }

    /// Largest `|A<x, y> z - x <y, z>_B|` over basis vectors.
    pub fn compatibility_residual(&self) -> f64 {
        let basis = self.basis();
        let units: Vec<_> = basis.iter().map(|&b| self.unit_vector(b)).collect();
        let mut worst = 0.0f64;
        for x in &units {
            for y in &units {
                let l = self.left_inner(x, y).expect("basis");
                for z in &units {
                    let lhs = self.left_act(&l, z).expect("basis");
                    let r = self.right_inner(y, z).expect("basis");
                    let rhs = self.right_act(x, &r).expect("basis");
                    for (p, q) in lhs.iter().zip(&rhs) {
                        worst = worst.max((p - q).norm());
                    }
                }
            }
        }
        worst
    }

    /// Fullness on both sides plus inner-product compatibility.
    pub fn imprimitivity_report(&self, tol: f64) -> Report {
        let mut r = Report::new();
        let full = |name: &str, ok: bool| {
            Check::new(name, if ok { crate::report::Status::Pass } else { crate::report::Status::Fail }, "")
        };
        r.push(full("full-left", self.is_full_left()));
        r.push(full("full-right", self.is_full_right()));
        let scale = 1.0 + self.comps.iter().map(|c| c.gram.max_abs()).fold(0.0, f64::max);
        r.push(Check::residual("inner-product-compatibility", self.compatibility_residual(), tol * scale * scale));
        r
    }

    pub fn is_imprimitivity(&self, tol: f64) -> bool {
        self.imprimitivity_report(tol).passed()
    }

    /// `self (x)_B other` for `self` an A-B and `other` a B-C bimodule.
    /// Component `(i, k)` is `sum_j M_ij (x) N_jk`, ordered by `j`.
    pub fn tensor(&self, other: &HilbertBimodule) -> Result<HilbertBimodule> {
        if self.right != other.left {
            return dim_err(format!(
                "tensor product over mismatched algebras: C^{} and C^{}",
                self.right, other.left
            ));
        }
        let mut comps = Vec::new();
        for i in 0..self.left {
            for k in 0..other.right {
                let grams: Vec<CMatrix> = (0..self.right)
                    .filter(|&j| self.component(i, j).dim > 0 && other.component(j, k).dim > 0)
                    .map(|j| kron(&self.component(i, j).gram, &other.component(j, k).gram))
                    .collect();
                if !grams.is_empty() {
                    comps.push((i, k, crate::numkernel::direct_sum(&grams)?));
                }
            }
        }
        HilbertBimodule::new(self.left, other.right, comps)
    }

    /// Copy with every Gram matrix replaced by the identity, together with the
    /// unitary isomorphism `self -> copy` (the square roots of the Grams).
    pub fn orthonormalize(&self) -> Result<(HilbertBimodule, BimoduleIsomorphism)> {
        let mut maps = Vec::with_capacity(self.comps.len());
        let mut comps = Vec::new();
        for i in 0..self.left {
            for j in 0..self.right {
                let c = self.component(i, j);
                if c.dim == 0 {
                    maps.push(CMatrix::zeros(0, 0));
                    continue;
                }
                let e = hermitian_eig(&c.gram)?;
                let root: Vec<Complex64> = e.values.iter().map(|&l| Complex64::new(l.sqrt(), 0.0)).collect();
                let s = &(&e.vectors * &CMatrix::diagonal(&root)) * &e.vectors.adjoint();
                maps.push(s);
                comps.push((i, j, CMatrix::identity(c.dim)));
            }
        }
        Ok((
            HilbertBimodule::new(self.left, self.right, comps)?,
            BimoduleIsomorphism {
                left: self.left,
                right: self.right,
                maps,
            },
        ))
    }
}

/// Component-preserving linear map between bimodules over the same algebras.
#[derive(Clone, Debug, PartialEq)]
pub struct BimoduleIsomorphism {
    left: usize,
    right: usize,
    /// `maps[i * right + j]` sends component `(i, j)` of the source to the target.
    maps: Vec<CMatrix>,
}

impl BimoduleIsomorphism {
    pub fn new(left: usize, right: usize, maps: Vec<CMatrix>) -> Result<Self> {
        if maps.len() != left * right {
            return dim_err(format!("{} component maps for a {left}x{right} grid", maps.len()));
        }
        Ok(Self { left, right, maps })
    }

    pub fn map(&self, i: usize, j: usize) -> &CMatrix {
        &self.maps[i * self.right + j]
    }

    /// Largest deviation from an inner-product preserving bijection
    /// `source -> target`; infinite on a shape mismatch.
    pub fn residual(&self, source: &HilbertBimodule, target: &HilbertBimodule) -> f64 {
        if (source.left, source.right) != (self.left, self.right)
            || (target.left, target.right) != (self.left, self.right)
        {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.left {
            for j in 0..self.right {
                let (s, t, u) = (source.component(i, j), target.component(i, j), self.map(i, j));
                if s.dim != t.dim || u.shape() != (t.dim, s.dim) {
                    return f64::INFINITY;
                }
                if s.dim == 0 {
                    continue;
                }
                let pulled = &(&u.adjoint() * &t.gram) * u;
                worst = worst.max(pulled.max_abs_diff(&s.gram));
            }
        }
        worst
    }

    /// Apply to a coordinate vector of `source`.
    pub fn apply(&self, source: &HilbertBimodule, target: &HilbertBimodule, x: &[Complex64]) -> Result<Vec<Complex64>> {
        source.check_vec(x)?;
        let mut out = vec![ZERO; target.dim()];
        for i in 0..self.left {
            for j in 0..self.right {
                let (so, to) = (source.offset(i, j), target.offset(i, j));
                let u = self.map(i, j);
                let part = u.mul_vec(&x[so..so + u.cols()]);
                out[to..to + part.len()].copy_from_slice(&part);
            }
        }
        Ok(out)
    }
}

/// Labels of the basis of `(X (x) Y) (x) Z` and `X (x) (Y (x) Z)`, as
/// `(j, k, alpha, beta, gamma)` per component `(i, l)`.
fn triple_labels(
    x: &HilbertBimodule,
    y: &HilbertBimodule,
    z: &HilbertBimodule,
    i: usize,
    l: usize,
    left_nested: bool,
) -> Vec<[usize; 5]> {
    let mut out = Vec::new();
    let (nj, nk) = (x.right, y.right);
    let dx = |j: usize| x.component(i, j).dim;
    let dy = |j: usize, k: usize| y.component(j, k).dim;
    let dz = |k: usize| z.component(k, l).dim;
    if left_nested {
        for k in 0..nk {
            for j in 0..nj {
                if dx(j) == 0 || dy(j, k) == 0 || dz(k) == 0 {
                    continue;
                }
                for a in 0..dx(j) {
                    for b in 0..dy(j, k) {
                        for c in 0..dz(k) {
                            out.push([j, k, a, b, c]);
                        }
                    }
                }
            }
        }
    } else {
        for j in 0..nj {
            if dx(j) == 0 {
                continue;
            }
            for a in 0..dx(j) {
                for k in 0..nk {
                    if dy(j, k) == 0 || dz(k) == 0 {
                        continue;
                    }
                    for b in 0..dy(j, k) {
                        for c in 0..dz(k) {
                            out.push([j, k, a, b, c]);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Canonical isomorphism `(X (x) Y) (x) Z -> X (x) (Y (x) Z)`: a permutation
/// of product basis vectors in each component.
pub fn associator(x: &HilbertBimodule, y: &HilbertBimodule, z: &HilbertBimodule) -> Result<BimoduleIsomorphism> {
    if x.right != y.left || y.right != z.left {
        return dim_err("associator over mismatched algebras");
    }
    let mut maps = Vec::with_capacity(x.left * z.right);
    for i in 0..x.left {
        for l in 0..z.right {
            let src = triple_labels(x, y, z, i, l, true);
            let dst = triple_labels(x, y, z, i, l, false);
            let mut p = CMatrix::zeros(dst.len(), src.len());
            for (c, lab) in src.iter().enumerate() {
                let r = dst.iter().position(|d| d == lab).expect("same label set");
                p[(r, c)] = ONE;
            }
            maps.push(p);
        }
    }
    BimoduleIsomorphism::new(x.left, z.right, maps)
}

/// Canonical isomorphism `X (x) id -> X`, or `id (x) X -> X`: identity matrices.
pub fn unitor(x: &HilbertBimodule) -> BimoduleIsomorphism {
    let maps = (0..x.left)
        .flat_map(|i| (0..x.right).map(move |j| (i, j)))
        .map(|(i, j)| CMatrix::identity(x.component(i, j).dim))
        .collect();
    BimoduleIsomorphism {
        left: x.left,
        right: x.right,
        maps,
    }
}

/// Graph of the homeomorphism induced by an imprimitivity bimodule, with a
/// unit vector in each line fiber.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    pub sigma: Vec<usize>,
    /// Coordinates of the chosen unit vector in component `(i, sigma(i))`.
    pub unit_vectors: Vec<Complex64>,
}

/// Reads `sigma` and the line fibers off an imprimitivity bimodule.
pub fn spectral_decomposition(m: &HilbertBimodule, tol: f64) -> Result<SpectralDecomposition> {
    let report = m.imprimitivity_report(tol);
    if let Some(f) = report.failures().next() {
        return Err(Error::Precondition(format!("not an imprimitivity bimodule: {} fails", f.name)));
    }
    if m.left != m.right {
        return Err(Error::Contract(format!(
            "imprimitivity bimodule between C^{} and C^{}",
            m.left, m.right
        )));
    }
    let mut sigma = Vec::with_capacity(m.left);
    let mut unit_vectors = Vec::with_capacity(m.left);
    for i in 0..m.left {
        let support: Vec<usize> = (0..m.right).filter(|&j| m.component(i, j).dim > 0).collect();
        match support.as_slice() {
            [j] if m.component(i, *j).dim == 1 => {
                sigma.push(*j);
                let g = m.component(i, *j).gram[(0, 0)].re;
                unit_vectors.push(Complex64::new(1.0 / g.sqrt(), 0.0));
            }
            _ => {
                return Err(Error::Contract(format!(
                    "point {i} is not matched to a single line fiber"
                )))
            }
        }
    }
    Ok(SpectralDecomposition { sigma, unit_vectors })
}

impl SpectralDecomposition {
    /// Sections of the line bundle over the graph of `sigma`, twisted into an
    /// A-B bimodule: an orthonormal line in each component `(i, sigma(i))`.
    pub fn reconstruct(&self) -> Result<HilbertBimodule> {
        let n = self.sigma.len();
        HilbertBimodule::new(
            n,
            n,
            (0..n).map(|i| (i, self.sigma[i], CMatrix::identity(1))).collect(),
        )
    }

    /// Isomorphism from the decomposed bimodule to [`Self::reconstruct`],
    /// sending each chosen unit vector to the reconstructed basis vector.
    pub fn isomorphism(&self, original: &HilbertBimodule) -> Result<BimoduleIsomorphism> {
        let n = self.sigma.len();
        if original.left != n || original.right != n {
            return dim_err("decomposition does not match the bimodule");
        }
        let mut maps = vec![CMatrix::zeros(0, 0); n * n];
        for i in 0..n {
            maps[i * n + self.sigma[i]] = CMatrix::diagonal(&[ONE / self.unit_vectors[i]]);
        }
        BimoduleIsomorphism::new(n, n, maps)
    }
}

/// Left module over `C^n` on a Hilbert space `C^d`, given by the commuting
/// projections `p_i` through which the minimal idempotents act.
#[derive(Clone, Debug, PartialEq)]
pub struct LeftModule {
    projections: Vec<CMatrix>,
}

impl LeftModule {
    pub fn new(projections: Vec<CMatrix>, tol: f64) -> Result<Self> {
        let Some(first) = projections.first() else {
            return Err(Error::Domain("module over C^0".into()));
        };
        let d = first.rows();
        let mut sum = CMatrix::zeros(d, d);
        for (i, p) in projections.iter().enumerate() {
            if p.shape() != (d, d) {
                return dim_err(format!("projection {i} has shape {:?}", p.shape()));
            }
            if !p.is_hermitian(tol) || !(p * p).approx_eq(p, tol) {
                return Err(Error::Domain(format!("action of idempotent {i} is not an orthogonal projection")));
            }
            sum += p;
        }
        if !sum.approx_eq(&CMatrix::identity(d), tol) {
            return Err(Error::Domain("idempotent actions do not sum to the identity".into()));
        }
        Ok(Self { projections })
    }

    /// `sum_i C^{dims[i]}`, conjugated by the unitary `basis_change` when given.
    pub fn from_fiber_dims(dims: &[usize], basis_change: Option<&CMatrix>) -> Result<Self> {
        let d: usize = dims.iter().sum();
        let mut projections = Vec::with_capacity(dims.len());
        let mut o = 0;
        for &k in dims {
            let mut p = CMatrix::zeros(d, d);
            for t in o..o + k {
                p[(t, t)] = ONE;
            }
            o += k;
            projections.push(match basis_change {
                Some(u) => {
                    if u.shape() != (d, d) {
                        return dim_err("basis change has the wrong size");
                    }
                    &(u * &p) * &u.adjoint()
                }
                None => p,
            });
        }
        Self::new(projections, 1e-9)
    }

    pub fn points(&self) -> usize {
        self.projections.len()
    }

    pub fn dim(&self) -> usize {
        self.projections[0].rows()
    }

    pub fn projection(&self, i: usize) -> &CMatrix {
        &self.projections[i]
    }

    /// Action of an element of `C^n` given by its values.
    pub fn action(&self, a: &[Complex64]) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for (p, &z) in self.projections.iter().zip(a) {
            m.axpy(z, p);
        }
        m
    }
}

/// Hermitian vector bundle over a finite set: an orthonormal frame of each
/// fiber inside the ambient module space.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteBundle {
    pub ambient: usize,
    pub fibers: Vec<Vec<Vec<Complex64>>>,
}

impl FiniteBundle {
    pub fn fiber_dims(&self) -> Vec<usize> {
        self.fibers.iter().map(Vec::len).collect()
    }

    /// Matrix whose columns are the frame of fiber `i`.
    pub fn frame(&self, i: usize) -> CMatrix {
        CMatrix::from_columns(self.ambient, &self.fibers[i]).expect("frame vectors have ambient length")
    }
}

/// Fibers `e_i M` cut down by the idempotents.
pub fn module_to_bundle(m: &LeftModule) -> Result<FiniteBundle> {
    let d = m.dim();
    let mut fibers = Vec::with_capacity(m.points());
    for p in &m.projections {
        let cols: Vec<Vec<Complex64>> = (0..d).map(|j| p.column(j)).collect();
        fibers.push(span_basis(d, &cols, 1e-8)?);
    }
    let total: usize = fibers.iter().map(Vec::len).sum();
    if total != d {
        return Err(Error::Contract(format!("fibers of total dimension {total} in a module of dimension {d}")));
    }
    Ok(FiniteBundle { ambient: d, fibers })
}

/// Module of sections of a bundle with the given fiber dimensions.
pub fn bundle_to_module(dims: &[usize]) -> Result<LeftModule> {
    LeftModule::from_fiber_dims(dims, None)
}

/// Module map `Phi: M -> M'` intertwining the actions through `phi: C^n -> C^n'`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleMorphismPair {
    pub phi: AlgebraHomomorphism,
    pub map: CMatrix,
}

impl ModuleMorphismPair {
    /// Largest `|Phi(a x) - phi(a) Phi(x)|` over minimal idempotents `a`.
    pub fn residual(&self, source: &LeftModule, target: &LeftModule) -> Result<f64> {
        if self.map.shape() != (target.dim(), source.dim()) {
            return dim_err("module map has the wrong shape");
        }
        if self.phi.source().num_blocks() != source.points() || self.phi.target().num_blocks() != target.points() {
            return dim_err("algebra map does not match the modules");
        }
        let mut worst = 0.0f64;
        for i in 0..source.points() {
            let img = self.phi.apply(&self.phi.source().block_unit(i))?;
            let vals: Vec<Complex64> = img.blocks().iter().map(|b| b[(0, 0)]).collect();
            let lhs = &self.map * source.projection(i);
            let rhs = &target.action(&vals) * &self.map;
            worst = worst.max(lhs.max_abs_diff(&rhs));
        }
        Ok(worst)
    }

    /// Fiber maps `M_{kappa(j)} -> M'_j` in the bundle frames, where
    /// `phi(x)_j = x_{kappa(j)}`, together with the residual of rebuilding `Phi`.
    pub fn fiber_maps(&self, source: &LeftModule, target: &LeftModule) -> Result<(Vec<CMatrix>, f64)> {
        let kappa = self
            .phi
            .block_map()
            .ok_or_else(|| Error::Domain("algebra map is not induced by a map of points".into()))?;
        let (b, bt) = (module_to_bundle(source)?, module_to_bundle(target)?);
        let mut maps = Vec::with_capacity(kappa.len());
        let mut rebuilt = CMatrix::zeros(target.dim(), source.dim());
        for (j, &k) in kappa.iter().enumerate() {
            let (q, qt) = (b.frame(k), bt.frame(j));
            if q.cols() == 0 || qt.cols() == 0 {
                maps.push(CMatrix::zeros(qt.cols(), q.cols()));
                continue;
            }
            let f = &(&qt.adjoint() * &self.map) * &q;
            rebuilt += &(&(&qt * &f) * &q.adjoint());
            maps.push(f);
        }
        Ok((maps, rebuilt.max_abs_diff(&self.map)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn c_as_bimodule_over_itself_is_imprimitivity() {
        let m = HilbertBimodule::identity(1).unwrap();
        assert!(m.is_imprimitivity(1e-12));
    }

    #[test]
    fn c2_over_c_c_fails_compatibility() {
        // C^2 as a C-C bimodule.
        let m = HilbertBimodule::from_dims(&[vec![2]]).unwrap();
        let r = m.imprimitivity_report(1e-12);
        assert!(r.get("full-left").unwrap().passed());
        assert!(!r.get("inner-product-compatibility").unwrap().passed());
    }

    #[test]
    fn zero_row_is_not_left_full() {
        let m = HilbertBimodule::from_dims(&[vec![1, 0], vec![0, 0]]).unwrap();
        assert!(!m.is_full_left());
        assert!(!m.is_full_right());
    }

    #[test]
    fn spectral_decomposition_recovers_cycle() {
        let sigma = vec![1, 2, 0];
        let w = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)];
        let m = HilbertBimodule::permutation_line(&sigma, &w).unwrap();
        let d = spectral_decomposition(&m, 1e-12).unwrap();
        assert_eq!(d.sigma, sigma);
        let rec = d.reconstruct().unwrap();
        assert!(d.isomorphism(&m).unwrap().residual(&m, &rec) <= 1e-12);
    }

    #[test]
    fn rejects_bad_gram_and_non_permutations() {
        let bad = CMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(HilbertBimodule::new(1, 1, vec![(0, 0, bad)]).is_err());
        assert!(HilbertBimodule::permutation_line(&[0, 0], &[c(1.0, 0.0); 2]).is_err());
    }

    #[test]
    fn associator_is_unitary_permutation() {
        let x = HilbertBimodule::from_dims(&[vec![1, 2], vec![2, 0]]).unwrap();
        let y = HilbertBimodule::from_dims(&[vec![1, 1, 0], vec![2, 0, 1]]).unwrap();
        let z = HilbertBimodule::from_dims(&[vec![1, 1], vec![0, 2], vec![1, 0]]).unwrap();
        let lhs = x.tensor(&y).unwrap().tensor(&z).unwrap();
        let rhs = x.tensor(&y.tensor(&z).unwrap()).unwrap();
        let a = associator(&x, &y, &z).unwrap();
        assert_eq!(a.residual(&lhs, &rhs), 0.0);
    }

    #[test]
    fn unitors() {
        let x = HilbertBimodule::from_dims(&[vec![1, 2], vec![2, 0]]).unwrap();
        let l = HilbertBimodule::identity(2).unwrap().tensor(&x).unwrap();
        let r = x.tensor(&HilbertBimodule::identity(2).unwrap()).unwrap();
        assert_eq!(unitor(&x).residual(&l, &x), 0.0);
        assert_eq!(unitor(&x).residual(&r, &x), 0.0);
    }

    #[test]
    fn serre_swan_fiber_dims() {
        let m = LeftModule::from_fiber_dims(&[2, 0, 1], None).unwrap();
        let b = module_to_bundle(&m).unwrap();
        assert_eq!(b.fiber_dims(), vec![2, 0, 1]);
        let back = bundle_to_module(&b.fiber_dims()).unwrap();
        assert_eq!(module_to_bundle(&back).unwrap().fiber_dims(), vec![2, 0, 1]);
    }

    #[test]
    fn serre_swan_in_a_rotated_basis() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u = CMatrix::from_fn(3, 3, |i, j| match (i, j) {
            (0, 0) | (1, 0) => c(s, 0.0),
            (0, 1) => c(0.0, s),
            (1, 1) => c(0.0, -s),
            (2, 2) => c(1.0, 0.0),
            _ => c(0.0, 0.0),
        });
        assert!(u.is_unitary(1e-12));
        let m = LeftModule::from_fiber_dims(&[1, 2], Some(&u)).unwrap();
        let b = module_to_bundle(&m).unwrap();
        assert_eq!(b.fiber_dims(), vec![1, 2]);
        // The fiber of point 0 is spanned by the first column of u.
        let f = &b.fibers[0][0];
        let overlap: Complex64 = f.iter().zip(u.column(0)).map(|(a, b)| a.conj() * b).sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn takahashi_fiber_maps_rebuild_module_map() {
        // C^2 -> C^3 with kappa = [0, 1, 1]; modules with fibers [1, 1] and [1, 2, 1].
        let a2 = FiniteCStarAlgebra::commutative(2).unwrap();
        let a3 = FiniteCStarAlgebra::commutative(3).unwrap();
        let phi = AlgebraHomomorphism::from_block_map(a2, a3, &[0, 1, 1]).unwrap();
        let src = LeftModule::from_fiber_dims(&[1, 1], None).unwrap();
        let tgt = LeftModule::from_fiber_dims(&[1, 2, 1], None).unwrap();
        let map = CMatrix::from_real_rows(&[&[2.0, 0.0], &[0.0, 1.0], &[0.0, -1.0], &[0.0, 3.0]]);
        let pair = ModuleMorphismPair { phi, map };
        assert!(pair.residual(&src, &tgt).unwrap() < 1e-14);
        let (maps, res) = pair.fiber_maps(&src, &tgt).unwrap();
        assert_eq!(maps.len(), 3);
        assert_eq!(maps[1].shape(), (2, 1));
        assert!(res < 1e-14);
    }

    fn perm(n: usize) -> impl Strategy<Value = Vec<usize>> {
        Just((0..n).collect::<Vec<_>>()).prop_shuffle()
    }

    proptest! {
        #[test]
        fn line_bimodules_compose(n in 1usize..5, s in perm(4), t in perm(4)) {
            let s: Vec<usize> = s.into_iter().filter(|&k| k < n).collect();
            let t: Vec<usize> = t.into_iter().filter(|&k| k < n).collect();
            let ones = vec![c(1.0, 0.0); n];
            let a = HilbertBimodule::permutation_line(&s, &ones).unwrap();
            let b = HilbertBimodule::permutation_line(&t, &ones).unwrap();
            let ab = a.tensor(&b).unwrap();
            prop_assert!(ab.is_imprimitivity(1e-12));
            let d = spectral_decomposition(&ab, 1e-12).unwrap();
            let composed: Vec<usize> = s.iter().map(|&k| t[k]).collect();
            prop_assert_eq!(d.sigma, composed);
        }

        #[test]
        fn imprimitivity_invariant_under_gram_rescaling(n in 1usize..5, s in perm(4), r in proptest::collection::vec(0.2..3.0f64, 4)) {
            let s: Vec<usize> = s.into_iter().filter(|&k| k < n).collect();
            let w: Vec<Complex64> = r[..n].iter().map(|&x| c(x, 0.0)).collect();
            let m = HilbertBimodule::permutation_line(&s, &w).unwrap();
            prop_assert!(m.is_imprimitivity(1e-12));
            let (o, iso) = m.orthonormalize().unwrap();
            prop_assert!(iso.residual(&m, &o) < 1e-12);
            prop_assert!(o.is_imprimitivity(1e-12));
        }
    }
}
