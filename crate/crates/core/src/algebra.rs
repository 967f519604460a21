//! Finite C*-algebras `M_{n_1} + ... + M_{n_k}`, their elements, states and
//! *-homomorphisms, and the finite Gel'fand correspondence.

use num_complex::Complex64;

use crate::error::{dim_err, Error, Result};
use crate::numkernel::{fix_phase, hermitian_eig, operator_norm};
use crate::report::{Check, Report};
use crate::CMatrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `M_{n_1}(C) + ... + M_{n_k}(C)`, described by its block sizes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteCStarAlgebra {
    blocks: Vec<usize>,
}

/// Matrix unit `E_{ij}` of one block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatrixUnit {
    pub block: usize,
    pub row: usize,
    pub col: usize,
}

impl FiniteCStarAlgebra {
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Domain("an algebra needs at least one block".into()));
        }
        if let Some(i) = blocks.iter().position(|&n| n == 0) {
            return Err(Error::Domain(format!("block {i} has size 0")));
        }
        Ok(Self { blocks })
    }

    /// `C^n`.
    pub fn commutative(n: usize) -> Result<Self> {
        Self::new(vec![1; n])
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Complex dimension `sum n_i^2`, also the real dimension of the self-adjoint part.
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|n| n * n).sum()
    }

    pub fn is_commutative(&self) -> bool {
        self.blocks.iter().all(|&n| n == 1)
    }

    /// Offset of block `b` in the matrix-unit basis.
    fn offset(&self, b: usize) -> usize {
        self.blocks[..b].iter().map(|n| n * n).sum()
    }

    pub fn unit_index(&self, u: MatrixUnit) -> usize {
        let n = self.blocks[u.block];
        self.offset(u.block) + u.row * n + u.col
    }

    /// Matrix units in block-major, row-major order.
    pub fn matrix_units(&self) -> Vec<MatrixUnit> {
        let mut out = Vec::with_capacity(self.dim());
        for (block, &n) in self.blocks.iter().enumerate() {
            for row in 0..n {
                for col in 0..n {
                    out.push(MatrixUnit { block, row, col });
                }
            }
        }
        out
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement {
            blocks: self.blocks.iter().map(|&n| CMatrix::zeros(n, n)).collect(),
        }
    }

    pub fn unit(&self) -> AlgebraElement {
        AlgebraElement {
            blocks: self.blocks.iter().map(|&n| CMatrix::identity(n)).collect(),
        }
    }

    pub fn matrix_unit(&self, u: MatrixUnit) -> AlgebraElement {
        let mut x = self.zero();
        x.blocks[u.block][(u.row, u.col)] = ONE;
        x
    }

    /// Unit of block `b`: the minimal central projection.
    pub fn block_unit(&self, b: usize) -> AlgebraElement {
        let mut x = self.zero();
        x.blocks[b] = CMatrix::identity(self.blocks[b]);
        x
    }

    pub fn element(&self, blocks: Vec<CMatrix>) -> Result<AlgebraElement> {
        if blocks.len() != self.blocks.len() {
            return dim_err(format!(
                "{} blocks supplied for an algebra with {}",
                blocks.len(),
                self.blocks.len()
            ));
        }
        for (i, (m, &n)) in blocks.iter().zip(&self.blocks).enumerate() {
            if m.shape() != (n, n) {
                return dim_err(format!("block {i} is {}x{}, expected {n}x{n}", m.rows(), m.cols()));
            }
        }
        Ok(AlgebraElement { blocks })
    }

    /// Element of `C^n` with the given coordinate values.
    pub fn from_values(&self, values: &[Complex64]) -> Result<AlgebraElement> {
        if !self.is_commutative() {
            return Err(Error::Domain("from_values needs a commutative algebra".into()));
        }
        if values.len() != self.blocks.len() {
            return dim_err(format!("{} values for C^{}", values.len(), self.blocks.len()));
        }
        Ok(AlgebraElement {
            blocks: values.iter().map(|&z| CMatrix::diagonal(&[z])).collect(),
        })
    }

    /// Element with the given coordinates in the matrix-unit basis.
    pub fn from_coords(&self, coords: &[Complex64]) -> Result<AlgebraElement> {
        if coords.len() != self.dim() {
            return dim_err(format!("{} coordinates for an algebra of dimension {}", coords.len(), self.dim()));
        }
        let mut blocks = Vec::with_capacity(self.blocks.len());
        let mut k = 0;
        for &n in &self.blocks {
            blocks.push(CMatrix::from_vec(n, n, coords[k..k + n * n].to_vec())?);
            k += n * n;
        }
        Ok(AlgebraElement { blocks })
    }

    /// Hilbert-Schmidt orthonormal real basis of the self-adjoint part:
    /// `E_ii`, `(E_ij + E_ji)/sqrt 2` and `i(E_ij - E_ji)/sqrt 2` for `i < j`.
    pub fn self_adjoint_basis(&self) -> Vec<AlgebraElement> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut out = Vec::with_capacity(self.dim());
        for (b, &n) in self.blocks.iter().enumerate() {
            for i in 0..n {
                for j in i..n {
                    if i == j {
                        out.push(self.matrix_unit(MatrixUnit { block: b, row: i, col: i }));
                        continue;
                    }
                    let mut sym = self.zero();
                    sym.blocks[b][(i, j)] = Complex64::new(s, 0.0);
                    sym.blocks[b][(j, i)] = Complex64::new(s, 0.0);
                    out.push(sym);
                    let mut anti = self.zero();
                    anti.blocks[b][(i, j)] = Complex64::new(0.0, s);
                    anti.blocks[b][(j, i)] = Complex64::new(0.0, -s);
                    out.push(anti);
                }
            }
        }
        out
    }

    /// Self-adjoint element `sum x_k b_k` over [`Self::self_adjoint_basis`].
    pub fn from_self_adjoint_coords(&self, x: &[f64]) -> Result<AlgebraElement> {
        let basis = self.self_adjoint_basis();
        if x.len() != basis.len() {
            return dim_err(format!("{} coordinates for a self-adjoint part of dimension {}", x.len(), basis.len()));
        }
        let mut out = self.zero();
        for (b, &c) in basis.iter().zip(x) {
            for (dst, src) in out.blocks.iter_mut().zip(&b.blocks) {
                dst.axpy(Complex64::new(c, 0.0), src);
            }
        }
        Ok(out)
    }

    pub fn check_element(&self, x: &AlgebraElement) -> Result<()> {
        if x.blocks.len() != self.blocks.len()
            || x.blocks.iter().zip(&self.blocks).any(|(m, &n)| m.shape() != (n, n))
        {
            return dim_err("element does not belong to this algebra");
        }
        Ok(())
    }
}

/// Tuple of square blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    blocks: Vec<CMatrix>,
}

impl AlgebraElement {
    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, b: usize) -> &CMatrix {
        &self.blocks[b]
    }

    pub fn shape(&self) -> Vec<usize> {
        self.blocks.iter().map(|m| m.rows()).collect()
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return dim_err(format!(
                "elements of different algebras: blocks {:?} and {:?}",
                self.shape(),
                other.shape()
            ));
        }
        Ok(())
    }

    fn zip(&self, other: &Self, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Result<Self> {
        self.check_shape(other)?;
        Ok(Self {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a * b)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            blocks: self.blocks.iter().map(|m| m.scale(s)).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            blocks: self.blocks.iter().map(CMatrix::adjoint).collect(),
        }
    }

    /// C*-norm: the largest block operator norm.
    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|m| operator_norm(m).unwrap_or(0.0))
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.shape() != other.shape() {
            return f64::INFINITY;
        }
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.blocks.iter().all(|m| m.is_hermitian(tol))
    }

    /// Coordinates in the matrix-unit basis.
    pub fn coords(&self) -> Vec<Complex64> {
        self.blocks.iter().flat_map(|m| m.as_slice().iter().copied()).collect()
    }

    /// Real coordinates over the self-adjoint basis (the anti-Hermitian part is dropped).
    pub fn self_adjoint_coords(&self, alg: &FiniteCStarAlgebra) -> Vec<f64> {
        alg.self_adjoint_basis()
            .iter()
            .map(|b| {
                b.blocks
                    .iter()
                    .zip(&self.blocks)
                    .map(|(p, q)| p.hs_inner(q).re)
                    .sum()
            })
            .collect()
    }
}

/// Character of a commutative summand: `x -> x_i` for a `1x1` block `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Character {
    pub index: usize,
}

impl Character {
    pub fn eval(&self, x: &AlgebraElement) -> Complex64 {
        x.blocks[self.index][(0, 0)]
    }
}

/// Pure state `x -> <v, x_b v>` with `v` a unit vector in block `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    block: usize,
    vector: Vec<Complex64>,
}

impl PureState {
    /// Normalises `vector` and fixes its phase.
    pub fn new(alg: &FiniteCStarAlgebra, block: usize, vector: Vec<Complex64>) -> Result<Self> {
        let Some(&n) = alg.blocks().get(block) else {
            return dim_err(format!("block {block} out of range for {} blocks", alg.num_blocks()));
        };
        if vector.len() != n {
            return dim_err(format!("vector of length {} for block of size {n}", vector.len()));
        }
        let norm = vector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 1e-12) || !norm.is_finite() {
            return Err(Error::Domain("state vector has zero norm".into()));
        }
        let mut vector: Vec<_> = vector.iter().map(|z| z / norm).collect();
        fix_phase(&mut vector);
        Ok(Self { block, vector })
    }

    pub fn from_character(c: Character) -> Self {
        Self {
            block: c.index,
            vector: vec![ONE],
        }
    }

    pub fn block(&self) -> usize {
        self.block
    }

    pub fn vector(&self) -> &[Complex64] {
        &self.vector
    }

    pub fn eval(&self, x: &AlgebraElement) -> Complex64 {
        let m = &x.blocks[self.block];
        let mv = m.mul_vec(&self.vector);
        self.vector.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }

    /// Values on the matrix-unit basis.
    pub fn functional(&self, alg: &FiniteCStarAlgebra) -> Vec<Complex64> {
        let mut out = vec![ZERO; alg.dim()];
        for u in alg.matrix_units() {
            if u.block == self.block {
                out[alg.unit_index(u)] = self.vector[u.row].conj() * self.vector[u.col];
            }
        }
        out
    }

    /// Recovers a pure state from its values on the matrix units, rejecting
    /// functionals that are not pure states.
    pub fn from_functional(alg: &FiniteCStarAlgebra, values: &[Complex64], tol: f64) -> Result<Self> {
        if values.len() != alg.dim() {
            return dim_err(format!("{} values for an algebra of dimension {}", values.len(), alg.dim()));
        }
        let mut found = None;
        for (b, &n) in alg.blocks().iter().enumerate() {
            // rho_{ji} = omega(E_ij), so rho = transpose of the value block.
            let off = alg.offset(b);
            let rho = CMatrix::from_fn(n, n, |j, i| values[off + i * n + j]);
            let tr = rho.trace();
            if rho.max_abs() <= tol {
                continue;
            }
            if found.is_some() {
                return Err(Error::Domain("functional is supported on more than one block".into()));
            }
            if (tr - ONE).norm() > tol {
                return Err(Error::Domain(format!("functional has trace {tr} on block {b}")));
            }
            let eig = hermitian_eig(&rho)?;
            let top = *eig.values.last().expect("nonempty");
            if (top - 1.0).abs() > tol.max(1e-9) {
                return Err(Error::Domain(format!("functional on block {b} is not pure (top weight {top})")));
            }
            found = Some(Self::new(alg, b, eig.vectors.column(n - 1))?);
        }
        found.ok_or_else(|| Error::Domain("zero functional".into()))
    }
}

/// Linear map described by the images of the source matrix units.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraHomomorphism {
    source: FiniteCStarAlgebra,
    target: FiniteCStarAlgebra,
    images: Vec<AlgebraElement>,
}

impl AlgebraHomomorphism {
    pub fn from_images(
        source: FiniteCStarAlgebra,
        target: FiniteCStarAlgebra,
        images: Vec<AlgebraElement>,
    ) -> Result<Self> {
        if images.len() != source.dim() {
            return dim_err(format!("{} images for a source of dimension {}", images.len(), source.dim()));
        }
        for x in &images {
            target.check_element(x)?;
        }
        Ok(Self { source, target, images })
    }

    /// `phi(x)_j = x_{kappa(j)}`; target block `j` copies source block `kappa[j]`.
    pub fn from_block_map(
        source: FiniteCStarAlgebra,
        target: FiniteCStarAlgebra,
        kappa: &[usize],
    ) -> Result<Self> {
        if kappa.len() != target.num_blocks() {
            return dim_err(format!("block map of length {} for {} target blocks", kappa.len(), target.num_blocks()));
        }
        for (j, &b) in kappa.iter().enumerate() {
            match source.blocks().get(b) {
                None => return dim_err(format!("target block {j} maps to missing source block {b}")),
                Some(&n) if n != target.blocks()[j] => {
                    return dim_err(format!("target block {j} has size {}, source block {b} has size {n}", target.blocks()[j]))
                }
                _ => {}
            }
        }
        let images = source
            .matrix_units()
            .into_iter()
            .map(|u| {
                let mut y = target.zero();
                for (j, &b) in kappa.iter().enumerate() {
                    if b == u.block {
                        y.blocks[j][(u.row, u.col)] = ONE;
                    }
                }
                y
            })
            .collect();
        Ok(Self { source, target, images })
    }

    pub fn identity(alg: &FiniteCStarAlgebra) -> Self {
        let kappa: Vec<usize> = (0..alg.num_blocks()).collect();
        Self::from_block_map(alg.clone(), alg.clone(), &kappa).expect("identity block map")
    }

    pub fn source(&self) -> &FiniteCStarAlgebra {
        &self.source
    }

    pub fn target(&self) -> &FiniteCStarAlgebra {
        &self.target
    }

    pub fn images(&self) -> &[AlgebraElement] {
        &self.images
    }

    pub fn apply(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        self.source.check_element(x)?;
        let mut out = self.target.zero();
        for (c, img) in x.coords().iter().zip(&self.images) {
            if *c == ZERO {
                continue;
            }
            for (dst, src) in out.blocks.iter_mut().zip(&img.blocks) {
                dst.axpy(*c, src);
            }
        }
        Ok(out)
    }

    /// `self o first`.
    pub fn compose(&self, first: &AlgebraHomomorphism) -> Result<AlgebraHomomorphism> {
        if first.target != self.source {
            return dim_err(format!(
                "cannot compose: inner map lands in blocks {:?}, outer map starts from {:?}",
                first.target.blocks(),
                self.source.blocks()
            ));
        }
        let images = first
            .images
            .iter()
            .map(|y| self.apply(y))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            source: first.source.clone(),
            target: self.target.clone(),
            images,
        })
    }

    /// Multiplicativity, *-preservation and unitality on the matrix units.
    pub fn check(&self, tol: f64) -> Report {
        let units = self.source.matrix_units();
        let mut mult = 0.0f64;
        let mut star = 0.0f64;
        for (a, ua) in units.iter().enumerate() {
            let ea = self.source.matrix_unit(*ua);
            let adj = self.apply(&ea.adjoint()).expect("source element");
            star = star.max(adj.max_abs_diff(&self.images[a].adjoint()));
            for (b, ub) in units.iter().enumerate() {
                let eb = self.source.matrix_unit(*ub);
                let lhs = self.apply(&ea.mul(&eb).expect("same algebra")).expect("source element");
                let rhs = self.images[a].mul(&self.images[b]).expect("same algebra");
                mult = mult.max(lhs.max_abs_diff(&rhs));
            }
        }
        let unit = self
            .apply(&self.source.unit())
            .expect("source element")
            .max_abs_diff(&self.target.unit());
        let mut r = Report::new();
        r.push(Check::residual("multiplicative", mult, tol));
        r.push(Check::residual("star-preserving", star, tol));
        r.push(Check::residual("unital", unit, tol));
        r
    }

    /// Block map `kappa` with `phi(x)_j = x_{kappa(j)}`, when `phi` has that form exactly.
    pub fn block_map(&self) -> Option<Vec<usize>> {
        let kappa: Option<Vec<usize>> = (0..self.target.num_blocks())
            .map(|j| {
                (0..self.source.num_blocks()).find(|&b| {
                    self.apply(&self.source.block_unit(b))
                        .map(|img| {
                            img.blocks[j].max_abs_diff(&CMatrix::identity(self.target.blocks()[j])) == 0.0
                        })
                        .unwrap_or(false)
                })
            })
            .collect();
        let kappa = kappa?;
        let rebuilt = Self::from_block_map(self.source.clone(), self.target.clone(), &kappa).ok()?;
        (rebuilt.images == self.images).then_some(kappa)
    }

    /// Whether the image spans the target (rank test on image coordinates).
    pub fn is_surjective(&self, tol: f64) -> bool {
        let cols: Vec<Vec<Complex64>> = self.images.iter().map(AlgebraElement::coords).collect();
        crate::numkernel::span_basis(self.target.dim(), &cols, tol)
            .map(|b| b.len() == self.target.dim())
            .unwrap_or(false)
    }
}

/// Gel'fand spectrum of a commutative algebra.
pub fn spectrum(alg: &FiniteCStarAlgebra) -> Result<Vec<Character>> {
    if let Some(b) = alg.blocks().iter().position(|&n| n != 1) {
        return Err(Error::Domain(format!(
            "algebra is not commutative: block {b} has size {}",
            alg.blocks()[b]
        )));
    }
    Ok((0..alg.num_blocks()).map(|index| Character { index }).collect())
}

/// `omega -> omega o phi` on spectra. Entry `j` is the source character
/// obtained by pulling back target character `j`.
pub fn pullback_spectrum(phi: &AlgebraHomomorphism) -> Result<Vec<usize>> {
    let src = spectrum(phi.source())?;
    let tgt = spectrum(phi.target())?;
    tgt.iter()
        .map(|w| {
            let values: Vec<Complex64> = src
                .iter()
                .map(|c| w.eval(&phi.apply(&phi.source().block_unit(c.index)).expect("source unit")))
                .collect();
            let hits: Vec<usize> = (0..values.len()).filter(|&i| values[i] == ONE).collect();
            let rest_zero = values.iter().filter(|&&z| z != ONE).all(|&z| z == ZERO);
            match (hits.as_slice(), rest_zero) {
                ([i], true) => Ok(*i),
                _ => Err(Error::Domain(format!(
                    "pullback of character {} is not a character (values {:?})",
                    w.index, values
                ))),
            }
        })
        .collect()
}

/// `x -> (omega(x))_omega`, the values of `x` on the spectrum.
pub fn gelfand_transform(alg: &FiniteCStarAlgebra, x: &AlgebraElement) -> Result<Vec<Complex64>> {
    alg.check_element(x)?;
    Ok(spectrum(alg)?.iter().map(|c| c.eval(x)).collect())
}

/// Inverse of [`gelfand_transform`]: the element of `C^n` with these values.
pub fn inverse_gelfand_transform(alg: &FiniteCStarAlgebra, values: &[Complex64]) -> Result<AlgebraElement> {
    spectrum(alg)?;
    alg.from_values(values)
}

/// Pullback `C(Y) -> C(X)`, `g -> g o f`, for a map `f: X -> Y` between finite sets.
pub fn function_pullback(x_points: usize, y_points: usize, f: &[usize]) -> Result<AlgebraHomomorphism> {
    if f.len() != x_points {
        return dim_err(format!("map listed on {} points, domain has {x_points}", f.len()));
    }
    AlgebraHomomorphism::from_block_map(
        FiniteCStarAlgebra::commutative(y_points)?,
        FiniteCStarAlgebra::commutative(x_points)?,
        f,
    )
}

/// Result of comparing `Sp(A)` with `Sp(C(Sp(A)))` through `p -> ev_p`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationCheck {
    /// `point_map[p]` is the character of `C(Sp(A))` equal to `ev_p`.
    pub point_map: Vec<usize>,
    pub bijective: bool,
    /// Largest deviation of the Gel'fand transform from a *-isomorphism on the basis.
    pub residual: f64,
}

pub fn evaluation_homeomorphism_check(alg: &FiniteCStarAlgebra) -> Result<EvaluationCheck> {
    let points = spectrum(alg)?;
    let n = points.len();
    let functions = FiniteCStarAlgebra::commutative(n)?;
    let chars = spectrum(&functions)?;
    let mut point_map = Vec::with_capacity(n);
    for p in &points {
        // ev_p(f) = f(p); compare with each character on the indicator basis.
        let hit = chars.iter().position(|c| {
            (0..n).all(|q| {
                let f = functions.block_unit(q);
                let ev = if q == p.index { ONE } else { ZERO };
                c.eval(&f) == ev
            })
        });
        point_map.push(hit.ok_or_else(|| Error::Contract(format!("ev_{} is not a character", p.index)))?);
    }
    let mut seen = vec![false; n];
    for &q in &point_map {
        seen[q] = true;
    }
    let bijective = seen.iter().all(|&s| s);

    let mut residual = 0.0f64;
    for a in 0..n {
        let ea = alg.block_unit(a);
        let ga = gelfand_transform(alg, &ea)?;
        let back = inverse_gelfand_transform(alg, &ga)?;
        residual = residual.max(back.max_abs_diff(&ea));
        for b in 0..n {
            let eb = alg.block_unit(b);
            let prod = gelfand_transform(alg, &ea.mul(&eb)?)?;
            let gb = gelfand_transform(alg, &eb)?;
            for k in 0..n {
                residual = residual.max((prod[k] - ga[k] * gb[k]).norm());
            }
        }
        let star = gelfand_transform(alg, &ea.adjoint())?;
        for k in 0..n {
            residual = residual.max((star[k] - ga[k].conj()).norm());
        }
    }
    Ok(EvaluationCheck {
        point_map,
        bijective,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn commutative_spectrum_is_coordinate_projections() {
        let a = FiniteCStarAlgebra::commutative(3).unwrap();
        let sp = spectrum(&a).unwrap();
        assert_eq!(sp.len(), 3);
        let x = a.from_values(&[c(1.0, 0.0), c(2.0, 1.0), c(-3.0, 0.0)]).unwrap();
        assert_eq!(gelfand_transform(&a, &x).unwrap(), vec![c(1.0, 0.0), c(2.0, 1.0), c(-3.0, 0.0)]);
    }

    #[test]
    fn noncommutative_spectrum_names_block() {
        let a = FiniteCStarAlgebra::new(vec![1, 2]).unwrap();
        match spectrum(&a) {
            Err(Error::Domain(msg)) => assert!(msg.contains("block 1")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_algebras_rejected() {
        assert!(FiniteCStarAlgebra::new(vec![]).is_err());
        assert!(FiniteCStarAlgebra::new(vec![2, 0]).is_err());
    }

    #[test]
    fn dimensions() {
        let a = FiniteCStarAlgebra::new(vec![1, 2, 3]).unwrap();
        assert_eq!(a.dim(), 14);
        assert_eq!(a.self_adjoint_basis().len(), 14);
        assert_eq!(a.matrix_units().len(), 14);
    }

    #[test]
    fn self_adjoint_basis_is_hs_orthonormal() {
        let a = FiniteCStarAlgebra::new(vec![1, 3]).unwrap();
        let b = a.self_adjoint_basis();
        for (i, x) in b.iter().enumerate() {
            assert!(x.is_self_adjoint(0.0));
            for (j, y) in b.iter().enumerate() {
                let ip: Complex64 = x.blocks().iter().zip(y.blocks()).map(|(p, q)| p.hs_inner(q)).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - c(expect, 0.0)).norm() < 1e-15);
            }
        }
        let coords = vec![0.5, -1.0, 2.0, 0.25, 1.5, -0.5, 0.0, 3.0, 1.0, -2.0];
        let x = a.from_self_adjoint_coords(&coords).unwrap();
        let back = x.self_adjoint_coords(&a);
        for (p, q) in coords.iter().zip(&back) {
            assert!((p - q).abs() < 1e-14);
        }
    }

    #[test]
    fn pure_state_phase_and_functional() {
        let a = FiniteCStarAlgebra::new(vec![1, 2]).unwrap();
        let w = PureState::new(&a, 1, vec![c(0.0, 1.0), c(0.0, 1.0)]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((w.vector()[0] - c(s, 0.0)).norm() < 1e-15);
        let f = w.functional(&a);
        let back = PureState::from_functional(&a, &f, 1e-9).unwrap();
        assert_eq!(back.block(), 1);
        assert!((back.vector()[1] - w.vector()[1]).norm() < 1e-12);
        assert!(PureState::new(&a, 1, vec![c(0.0, 0.0), c(0.0, 0.0)]).is_err());
        assert!(PureState::new(&a, 2, vec![c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn mixed_functional_rejected() {
        let a = FiniteCStarAlgebra::new(vec![2]).unwrap();
        let f = vec![c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)];
        assert!(PureState::from_functional(&a, &f, 1e-9).is_err());
    }

    #[test]
    fn block_map_homomorphism_checks() {
        let src = FiniteCStarAlgebra::new(vec![2, 1]).unwrap();
        let tgt = FiniteCStarAlgebra::new(vec![1, 2, 2]).unwrap();
        let phi = AlgebraHomomorphism::from_block_map(src, tgt, &[1, 0, 0]).unwrap();
        assert!(phi.check(1e-12).passed());
        assert_eq!(phi.block_map(), Some(vec![1, 0, 0]));
    }

    #[test]
    fn non_multiplicative_map_fails_check() {
        let a = FiniteCStarAlgebra::commutative(2).unwrap();
        // x -> (x_1 + x_2) on both coordinates is linear and unital-violating.
        let img = a.from_values(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let phi = AlgebraHomomorphism::from_images(a.clone(), a.clone(), vec![img.clone(), img]).unwrap();
        let r = phi.check(1e-12);
        assert!(!r.passed());
        assert!(phi.block_map().is_none());
    }

    #[test]
    fn composition_order_mismatch_is_dimension_error() {
        let a2 = FiniteCStarAlgebra::commutative(2).unwrap();
        let a3 = FiniteCStarAlgebra::commutative(3).unwrap();
        let f = AlgebraHomomorphism::from_block_map(a2.clone(), a3.clone(), &[0, 1, 1]).unwrap();
        let g = AlgebraHomomorphism::from_block_map(a2.clone(), a3.clone(), &[1, 0, 0]).unwrap();
        assert!(matches!(f.compose(&g), Err(Error::Dimension(_))));
    }

    #[test]
    fn evaluation_is_bijective_exactly() {
        for n in 1..=6 {
            let a = FiniteCStarAlgebra::commutative(n).unwrap();
            let e = evaluation_homeomorphism_check(&a).unwrap();
            assert!(e.bijective);
            assert_eq!(e.point_map, (0..n).collect::<Vec<_>>());
            assert_eq!(e.residual, 0.0);
        }
    }

    fn maps(m: usize, n: usize) -> impl Strategy<Value = Vec<usize>> {
        proptest::collection::vec(0..n, m)
    }

    proptest! {
        // Sp is contravariant: Sp(psi o phi) = Sp(phi) o Sp(psi).
        #[test]
        fn pullback_is_contravariant(f in maps(4, 3), g in maps(3, 5)) {
            // f: X(4) -> Y(3), g: Y(3) -> Z(5); pullbacks C(Z) -> C(Y) -> C(X).
            let gf: Vec<usize> = f.iter().map(|&y| g[y]).collect();
            let pf = function_pullback(4, 3, &f).unwrap();
            let pg = function_pullback(3, 5, &g).unwrap();
            let composite = pf.compose(&pg).unwrap();
            prop_assert_eq!(&composite, &function_pullback(4, 5, &gf).unwrap());
            prop_assert_eq!(pullback_spectrum(&composite).unwrap(), gf);
            prop_assert_eq!(pullback_spectrum(&pf).unwrap(), f);
        }

        #[test]
        fn apply_is_multiplicative_on_random_elements(
            vals in proptest::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 10)
        ) {
            let src = FiniteCStarAlgebra::new(vec![1, 2]).unwrap();
            let tgt = FiniteCStarAlgebra::new(vec![2, 2, 1]).unwrap();
            let phi = AlgebraHomomorphism::from_block_map(src.clone(), tgt, &[1, 1, 0]).unwrap();
            let coords: Vec<Complex64> = vals.iter().map(|&(a, b)| c(a, b)).collect();
            let x = src.from_coords(&coords[..5]).unwrap();
            let y = src.from_coords(&coords[5..]).unwrap();
            let lhs = phi.apply(&x.mul(&y).unwrap()).unwrap();
            let rhs = phi.apply(&x).unwrap().mul(&phi.apply(&y).unwrap()).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }
}
