//! Morita-Connes morphisms for commutative algebras and bimodules with
//! orthonormal bases.
//!
//! For an `A`-`B` bimodule `X` with orthonormal basis `b` (`b` in component
//! `(i(b), j(b))`) and a triple `(B, H, D)`, a connection is stored through
//! `nabla(b) = sum_b' b' (x) Omega[b'][b]` with each coefficient an operator on
//! `H`, normalised by `Omega[b'][b] = pi(e_j(b')) Omega[b'][b]`. The transported
//! triple lives on `X (x)_B H = sum_b range pi(e_j(b))` with
//! `D' = P (1 (x) D + Omega) P`.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::algebra::FiniteCStarAlgebra;
use crate::bimodules::{associator, HilbertBimodule};
use crate::error::{dim_err, Error, Result};
use crate::numkernel::hermitian_eig;
use crate::report::{Check, Report};
use crate::triple::{Representation, SpectralTriple};
use crate::CMatrix;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct MoritaConnes {
    bimodule: HilbertBimodule,
    base: SpectralTriple,
    /// Row-major over `(b', b)`.
    coeffs: Vec<CMatrix>,
}

/// Transported triple with the labels `(b, r)` of its basis: vector `r` of a
/// basis of `range pi(e_j(b))`.
#[derive(Clone, Debug)]
pub struct Transported {
    pub triple: SpectralTriple,
    pub labels: Vec<(usize, usize)>,
    /// Isometry from the transported space into `sum_b H`.
    pub isometry: CMatrix,
}

fn base_projections(base: &SpectralTriple) -> Vec<CMatrix> {
    let alg = base.algebra();
    (0..alg.num_blocks())
        .map(|j| base.pi(&alg.block_unit(j)).expect("own element"))
        .collect()
}

/// Orthonormal basis of the range of a projection; coordinate vectors when
/// the projection is diagonal.
fn range_basis(p: &CMatrix) -> Result<Vec<Vec<Complex64>>> {
    let n = p.rows();
    let off = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| p[(i, j)].norm())
        .fold(0.0, f64::max);
    if off <= 1e-12 {
        return Ok((0..n)
            .filter(|&i| p[(i, i)].re > 0.5)
            .map(|i| {
                let mut v = vec![Complex64::new(0.0, 0.0); n];
                v[i] = ONE;
                v
            })
            .collect());
    }
    let e = hermitian_eig(p)?;
    Ok((0..n).filter(|&k| e.values[k] > 0.5).map(|k| e.vectors.column(k)).collect())
}

impl MoritaConnes {
    pub fn new(bimodule: HilbertBimodule, base: SpectralTriple, coeffs: Vec<CMatrix>) -> Result<Self> {
        if base.algebra() != &FiniteCStarAlgebra::commutative(bimodule.right_points())? {
            return dim_err(format!(
                "base algebra {:?} is not C^{} of the bimodule's right side",
                base.algebra().blocks(),
                bimodule.right_points()
            ));
        }
        for i in 0..bimodule.left_points() {
            for j in 0..bimodule.right_points() {
                let c = bimodule.component(i, j);
                if c.dim > 0 && c.gram.max_abs_diff(&CMatrix::identity(c.dim)) > 1e-12 {
                    return Err(Error::Precondition(format!(
                        "component ({i},{j}) is not orthonormal; orthonormalize the bimodule first"
                    )));
                }
            }
        }
        let nb = bimodule.dim();
        let n = base.dim();
        if coeffs.len() != nb * nb || coeffs.iter().any(|m| m.shape() != (n, n)) {
            return dim_err(format!("expected {} coefficients of size {n}x{n}", nb * nb));
        }
        Ok(Self { bimodule, base, coeffs })
    }

    /// `nabla(xi) = sum_b b (x) [D, <b, xi>]`: `Omega[b][b] = pi_j [D, pi_j]`.
    pub fn grassmann(bimodule: HilbertBimodule, base: SpectralTriple) -> Result<Self> {
        let p = base_projections(&base);
        let basis = bimodule.basis();
        let nb = basis.len();
        let n = base.dim();
        let mut coeffs = vec![CMatrix::zeros(n, n); nb * nb];
        for (k, b) in basis.iter().enumerate() {
            let pj = &p[b.j];
            coeffs[k * nb + k] = pj * &CMatrix::commutator(base.dirac(), pj);
        }
        Self::new(bimodule, base, coeffs)
    }

    /// Identity morphism of `base`: `B` over itself with `nabla(x) = 1 (x) [D, x]`.
    /// Its transport is `base` again.
    pub fn flat_identity(base: &SpectralTriple) -> Result<Self> {
        let nb = base.algebra().num_blocks();
        let x = HilbertBimodule::identity(nb)?;
        let p = base_projections(base);
        let mut coeffs = Vec::with_capacity(nb * nb);
        for l in 0..nb {
            for j in 0..nb {
                coeffs.push(&p[l] * &CMatrix::commutator(base.dirac(), &p[j]));
            }
        }
        Self::new(x, base.clone(), coeffs)
    }

    /// Adds the module map `Omega[b'][b] += pi_j' alpha[b', b] pi_j`, with
    /// `alpha` a Hermitian operator on `sum_b H`. Leibniz and Hermitian
    /// compatibility are preserved.
    pub fn perturbed(&self, alpha: &CMatrix) -> Result<Self> {
        let nb = self.bimodule.dim();
        let n = self.base.dim();
        if alpha.shape() != (nb * n, nb * n) {
            return dim_err(format!("perturbation must be {0}x{0}", nb * n));
        }
        if alpha.hermitian_residual() > 1e-12 * (1.0 + alpha.max_abs()) {
            return Err(Error::Domain("perturbation is not Hermitian".into()));
        }
        let p = base_projections(&self.base);
        let basis = self.bimodule.basis();
        let mut coeffs = self.coeffs.clone();
        for (bp, x) in basis.iter().enumerate() {
            for (b, y) in basis.iter().enumerate() {
                let block = alpha.submatrix(bp * n, b * n, n, n);
                coeffs[bp * nb + b] += &(&(&p[x.j] * &block) * &p[y.j]);
            }
        }
        Self::new(self.bimodule.clone(), self.base.clone(), coeffs)
    }

    pub fn bimodule(&self) -> &HilbertBimodule {
        &self.bimodule
    }

    pub fn base(&self) -> &SpectralTriple {
        &self.base
    }

    pub fn coefficient(&self, bp: usize, b: usize) -> &CMatrix {
        &self.coeffs[bp * self.bimodule.dim() + b]
    }

    /// `delta_{jl} Omega[b'][b] = Omega[b'][b] pi_l + delta_{b'b} pi_j [D, pi_l]`
    /// on basis vectors and minimal projections `e_l`.
    pub fn leibniz_residual(&self) -> f64 {
        let p = base_projections(&self.base);
        let basis = self.bimodule.basis();
        let nb = basis.len();
        let mut worst = 0.0f64;
        for (bp, _) in basis.iter().enumerate() {
            for (b, y) in basis.iter().enumerate() {
                let om = &self.coeffs[bp * nb + b];
                for (l, pl) in p.iter().enumerate() {
                    let mut r = if y.j == l { om.clone() } else { CMatrix::zeros(om.rows(), om.cols()) };
                    r -= &(om * pl);
                    if bp == b {
                        r -= &(&p[y.j] * &CMatrix::commutator(self.base.dirac(), pl));
                    }
                    worst = worst.max(r.max_abs());
                }
            }
        }
        worst
    }

    /// `<b, nabla c> - <nabla b, c> = [D, <b, c>]` for orthonormal `b, c`.
    pub fn hermitian_residual(&self) -> f64 {
        let p = base_projections(&self.base);
        let basis = self.bimodule.basis();
        let nb = basis.len();
        let mut worst = 0.0f64;
        for (b, x) in basis.iter().enumerate() {
            for (c, y) in basis.iter().enumerate() {
                let mut r = &(&p[x.j] * &self.coeffs[b * nb + c]) - &(&self.coeffs[c * nb + b].adjoint() * &p[y.j]);
                if b == c {
                    r -= &CMatrix::commutator(self.base.dirac(), &p[x.j]);
                }
                worst = worst.max(r.max_abs());
            }
        }
        worst
    }

    pub fn report(&self, tol: f64) -> Report {
        let mut r = Report::new();
        r.push(Check::residual("leibniz", self.leibniz_residual(), tol));
        r.push(Check::residual("hermitian", self.hermitian_residual(), tol));
        r
    }

    /// The triple over the left algebra induced by the connection.
    pub fn transport(&self) -> Result<Transported> {
        let p = base_projections(&self.base);
        let basis = self.bimodule.basis();
        let nb = basis.len();
        let n = self.base.dim();
        let mut labels = Vec::new();
        let mut cols = Vec::new();
        for (k, b) in basis.iter().enumerate() {
            for (r, v) in range_basis(&p[b.j])?.into_iter().enumerate() {
                let mut col = vec![Complex64::new(0.0, 0.0); nb * n];
                col[k * n..(k + 1) * n].copy_from_slice(&v);
                labels.push((k, r));
                cols.push(col);
            }
        }
        if labels.is_empty() {
            return Err(Error::Domain("transported Hilbert space is zero".into()));
        }
        let v = CMatrix::from_columns(nb * n, &cols)?;
        let mut big = CMatrix::zeros(nb * n, nb * n);
        for bp in 0..nb {
            for b in 0..nb {
                let mut block = self.coeffs[bp * nb + b].clone();
                if bp == b {
                    block += self.base.dirac();
                }
                big.set_submatrix(bp * n, b * n, &block);
            }
        }
        let d = &(&v.adjoint() * &big) * &v;
        let left = self.bimodule.left_points();
        let point = |h: usize| basis[labels[h].0].i;
        let mut order: Vec<usize> = (0..labels.len()).collect();
        order.sort_by_key(|&h| point(h));
        let mut u = CMatrix::zeros(labels.len(), labels.len());
        for (s, &h) in order.iter().enumerate() {
            u[(h, s)] = ONE;
        }
        let mult: Vec<usize> = (0..left).map(|k| order.iter().filter(|&&h| point(h) == k).count()).collect();
        let u = if order.iter().enumerate().all(|(s, &h)| s == h) { None } else { Some(u) };
        let rep = Representation::new(FiniteCStarAlgebra::commutative(left)?, mult, u)?;
        let triple = SpectralTriple::new(rep, d)
            .map_err(|e| Error::Contract(format!("transported Dirac operator: {e}; is the connection Hermitian?")))?;
        Ok(Transported {
            triple,
            labels,
            isometry: v,
        })
    }

    /// The same morphism over `base` conjugated by `w`.
    pub fn rebase(&self, w: &CMatrix) -> Result<Self> {
        let base = self.base.conjugate(w)?;
        let wa = w.adjoint();
        let coeffs = self.coeffs.iter().map(|m| &(w * m) * &wa).collect();
        Self::new(self.bimodule.clone(), base, coeffs)
    }

    /// Coefficient tensors relabelled through a permutation of the basis,
    /// `sigma[old] = new`, and compared.
    pub fn coefficient_distance(&self, other: &MoritaConnes, sigma: &[usize]) -> Result<f64> {
        let nb = self.bimodule.dim();
        if other.bimodule.dim() != nb || sigma.len() != nb || other.base.dim() != self.base.dim() {
            return dim_err("connections of different sizes");
        }
        let mut worst = 0.0f64;
        for bp in 0..nb {
            for b in 0..nb {
                worst = worst.max(self.coefficient(bp, b).max_abs_diff(other.coefficient(sigma[bp], sigma[b])));
            }
        }
        Ok(worst)
    }
}

/// `(b1, b2)` for each basis vector of `x (x) y`, in its basis order.
fn tensor_pairs(x: &HilbertBimodule, y: &HilbertBimodule) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..x.left_points() {
        for k in 0..y.right_points() {
            for j in 0..x.right_points() {
                let (dx, dy) = (x.component(i, j).dim, y.component(j, k).dim);
                if dx == 0 || dy == 0 {
                    continue;
                }
                for a in 0..dx {
                    for b in 0..dy {
                        out.push((x.offset(i, j) + a, y.offset(j, k) + b));
                    }
                }
            }
        }
    }
    out
}

fn same_triple(a: &SpectralTriple, b: &SpectralTriple, tol: f64) -> bool {
    a.algebra() == b.algebra()
        && a.dim() == b.dim()
        && a.dirac().max_abs_diff(b.dirac()) <= tol
        && a
            .representation()
            .generator_images()
            .iter()
            .zip(b.representation().generator_images())
            .all(|(x, y)| x.max_abs_diff(&y) <= tol)
}

/// `outer o inner`: `X^3 = X^outer (x) X^inner` over the inner base, with
/// `nabla^3(x1 (x) x2) = x1 (x) nabla^inner(x2) + nabla^outer(x1)(x2 (x) .)`.
/// The outer base must be the transport of `inner`.
pub fn compose_morita_connes(inner: &MoritaConnes, outer: &MoritaConnes) -> Result<MoritaConnes> {
    if outer.bimodule.right_points() != inner.bimodule.left_points() {
        return dim_err("composing Morita-Connes morphisms over different middle algebras");
    }
    let tr = inner.transport()?;
    if !same_triple(&outer.base, &tr.triple, 1e-9) {
        return Err(Error::Contract(
            "the outer morphism's base triple is not the transport of the inner one".into(),
        ));
    }
    let x3 = outer.bimodule.tensor(&inner.bimodule)?;
    let pairs = tensor_pairs(&outer.bimodule, &inner.bimodule);
    debug_assert_eq!(pairs.len(), x3.dim());
    let n = inner.base.dim();
    let nb1 = outer.bimodule.dim();
    let v = &tr.isometry;
    let va = v.adjoint();
    let lifted: Vec<CMatrix> = outer.coeffs.iter().map(|m| &(v * m) * &va).collect();
    let mut coeffs = Vec::with_capacity(pairs.len() * pairs.len());
    for &(b1p, b2p) in &pairs {
        for &(b1, b2) in &pairs {
            let mut m = lifted[b1p * nb1 + b1].submatrix(b2p * n, b2 * n, n, n);
            if b1p == b1 {
                m += inner.coefficient(b2p, b2);
            }
            coeffs.push(m);
        }
    }
    MoritaConnes::new(x3, inner.base.clone(), coeffs)
}

/// Permutation `W` with `transport(outer o inner) = W transport(outer) W^*`.
pub fn transport_identification(inner: &MoritaConnes, outer: &MoritaConnes) -> Result<CMatrix> {
    let t_inner = inner.transport()?;
    let t_outer = outer.transport()?;
    let comp = compose_morita_connes(inner, outer)?;
    let t_comp = comp.transport()?;
    let pairs = tensor_pairs(&outer.bimodule, &inner.bimodule);
    let pair_index: HashMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(c, &p)| (p, c)).collect();
    let comp_index: HashMap<(usize, usize), usize> =
        t_comp.labels.iter().enumerate().map(|(h, &l)| (l, h)).collect();
    let n_mid = outer.base.dim();
    let dim = t_outer.labels.len();
    let mut w = CMatrix::zeros(t_comp.labels.len(), dim);
    for (h1, &(b1, _)) in t_outer.labels.iter().enumerate() {
        let col = t_outer.isometry.column(h1);
        let block = &col[b1 * n_mid..(b1 + 1) * n_mid];
        let t = block
            .iter()
            .position(|z| (z.norm() - 1.0).abs() < 1e-12)
            .ok_or_else(|| Error::Contract("outer base is not in transported coordinates".into()))?;
        let (b2, r) = t_inner.labels[t];
        let c = pair_index[&(b1, b2)];
        let h3 = comp_index[&(c, r)];
        w[(h3, h1)] = ONE;
    }
    if w.unitary_residual() > 1e-12 {
        return Err(Error::Contract("transported spaces do not match".into()));
    }
    Ok(w)
}

/// Basis permutation of the associator `(X (x) Y) (x) Z -> X (x) (Y (x) Z)`,
/// as `sigma[old] = new`.
pub fn associator_permutation(x: &HilbertBimodule, y: &HilbertBimodule, z: &HilbertBimodule) -> Result<Vec<usize>> {
    let iso = associator(x, y, z)?;
    let src = x.tensor(y)?.tensor(z)?;
    let dst = x.tensor(&y.tensor(z)?)?;
    let mut sigma = vec![0; src.dim()];
    for i in 0..src.left_points() {
        for l in 0..src.right_points() {
            let m = iso.map(i, l);
            for c in 0..m.cols() {
                let r = (0..m.rows()).find(|&r| m[(r, c)].norm() > 0.5).expect("permutation");
                sigma[src.offset(i, l) + c] = dst.offset(i, l) + r;
            }
        }
    }
    Ok(sigma)
}
