//! Finite spectral triples and executable checks for their axioms.

mod axioms;
pub mod examples;
mod hochschild;

pub use axioms::{
    axiom_report, commutant_dimension, is_irreducible, sign_table, validate_even, validate_first_order,
    validate_real, KoSigns,
};
pub use hochschild::{
    boundary_matrix, evaluate_chain, find_orientation_cycle, omega_forms, validate_orientability, FormSpace, HochschildChain,
    MAX_CHAIN_DIM, ORIENTATION_TOL,
};

use crate::algebra::{AlgebraElement, FiniteCStarAlgebra, MatrixUnit};
use crate::error::{dim_err, Error, Result};
use crate::numkernel::{direct_sum, kron};
use crate::{CAntiunitary, CMatrix};

/// `pi(a) = U (sum_i a_i (x) I_{m_i}) U^*`.
#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    algebra: FiniteCStarAlgebra,
    multiplicities: Vec<usize>,
    basis_change: CMatrix,
}

impl Representation {
    pub fn new(algebra: FiniteCStarAlgebra, multiplicities: Vec<usize>, basis_change: Option<CMatrix>) -> Result<Self> {
        if multiplicities.len() != algebra.num_blocks() {
            return dim_err(format!(
                "{} multiplicities for {} blocks",
                multiplicities.len(),
                algebra.num_blocks()
            ));
        }
        let n: usize = algebra.blocks().iter().zip(&multiplicities).map(|(b, m)| b * m).sum();
        if n == 0 {
            return Err(Error::Domain("representation on the zero space".into()));
        }
        let basis_change = match basis_change {
            Some(u) => {
                if u.shape() != (n, n) {
                    return dim_err(format!("basis change is {}x{}, Hilbert space has dimension {n}", u.rows(), u.cols()));
                }
                let res = u.unitary_residual();
                if res > 1e-9 {
                    return Err(Error::Domain(format!("basis change is not unitary (residual {res:e})")));
                }
                u
            }
            None => CMatrix::identity(n),
        };
        Ok(Self {
            algebra,
            multiplicities,
            basis_change,
        })
    }

    pub fn algebra(&self) -> &FiniteCStarAlgebra {
        &self.algebra
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn basis_change(&self) -> &CMatrix {
        &self.basis_change
    }

    pub fn dim(&self) -> usize {
        self.basis_change.rows()
    }

    pub fn is_faithful(&self) -> bool {
        self.multiplicities.iter().all(|&m| m > 0)
    }

    pub fn pi(&self, x: &AlgebraElement) -> Result<CMatrix> {
        self.algebra.check_element(x)?;
        let blocks: Vec<CMatrix> = x
            .blocks()
            .iter()
            .zip(&self.multiplicities)
            .filter(|(_, &m)| m > 0)
            .map(|(b, &m)| kron(b, &CMatrix::identity(m)))
            .collect();
        let d = direct_sum(&blocks)?;
        Ok(&(&self.basis_change * &d) * &self.basis_change.adjoint())
    }

    pub fn pi_unit(&self, u: MatrixUnit) -> CMatrix {
        self.pi(&self.algebra.matrix_unit(u)).expect("matrix unit of this algebra")
    }

    /// Images of all matrix units, in `FiniteCStarAlgebra::matrix_units` order.
    pub fn generator_images(&self) -> Vec<CMatrix> {
        self.algebra.matrix_units().into_iter().map(|u| self.pi_unit(u)).collect()
    }

    fn conjugated(&self, w: &CMatrix) -> Self {
        Self {
            algebra: self.algebra.clone(),
            multiplicities: self.multiplicities.clone(),
            basis_change: w * &self.basis_change,
        }
    }
}

/// Finite spectral triple with optional grading and real structure.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralTriple {
    rep: Representation,
    dirac: CMatrix,
    grading: Option<CMatrix>,
    real: Option<CAntiunitary>,
    ko_dim: Option<u8>,
}

impl SpectralTriple {
    /// Rejects a non-Hermitian Dirac operator.
    pub fn new(rep: Representation, dirac: CMatrix) -> Result<Self> {
        let n = rep.dim();
        if dirac.shape() != (n, n) {
            return dim_err(format!("Dirac operator is {}x{}, Hilbert space has dimension {n}", dirac.rows(), dirac.cols()));
        }
        let res = dirac.hermitian_residual();
        if !(res <= 1e-9 * (1.0 + dirac.max_abs())) {
            return Err(Error::Domain(format!("Dirac operator is not Hermitian (residual {res:e})")));
        }
        Ok(Self {
            rep,
            dirac,
            grading: None,
            real: None,
            ko_dim: None,
        })
    }

    pub fn with_grading(mut self, grading: CMatrix) -> Result<Self> {
        if grading.shape() != self.dirac.shape() {
            return dim_err("grading has the wrong size");
        }
        self.grading = Some(grading);
        Ok(self)
    }

    pub fn with_real_structure(mut self, j: CAntiunitary, ko_dim: Option<u8>) -> Result<Self> {
        if j.dim() != self.dim() {
            return dim_err("real structure has the wrong size");
        }
        if let Some(n) = ko_dim {
            if n > 7 {
                return Err(Error::Domain(format!("KO-dimension {n} is not in 0..=7")));
            }
        }
        self.real = Some(j);
        self.ko_dim = ko_dim;
        Ok(self)
    }

    /// Relabel the KO-dimension, keeping every operator.
    pub fn with_ko_dim(mut self, ko_dim: Option<u8>) -> Result<Self> {
        if matches!(ko_dim, Some(n) if n > 7) {
            return Err(Error::Domain("KO-dimension must be in 0..=7".into()));
        }
        self.ko_dim = ko_dim;
        Ok(self)
    }

    pub fn with_dirac(&self, dirac: CMatrix) -> Result<Self> {
        let mut t = Self::new(self.rep.clone(), dirac)?;
        t.grading = self.grading.clone();
        t.real = self.real.clone();
        t.ko_dim = self.ko_dim;
        Ok(t)
    }

    pub fn representation(&self) -> &Representation {
        &self.rep
    }

    pub fn algebra(&self) -> &FiniteCStarAlgebra {
        self.rep.algebra()
    }

    pub fn dim(&self) -> usize {
        self.rep.dim()
    }

    pub fn dirac(&self) -> &CMatrix {
        &self.dirac
    }

    pub fn grading(&self) -> Option<&CMatrix> {
        self.grading.as_ref()
    }

    pub fn real_structure(&self) -> Option<&CAntiunitary> {
        self.real.as_ref()
    }

    pub fn ko_dim(&self) -> Option<u8> {
        self.ko_dim
    }

    pub fn pi(&self, x: &AlgebraElement) -> Result<CMatrix> {
        self.rep.pi(x)
    }

    /// `[D, pi(x)]`.
    pub fn commutator(&self, x: &AlgebraElement) -> Result<CMatrix> {
        Ok(CMatrix::commutator(&self.dirac, &self.pi(x)?))
    }

    /// Simultaneous conjugation of `pi`, `D`, `Gamma` and `J` by a unitary `W`.
    pub fn conjugate(&self, w: &CMatrix) -> Result<Self> {
        if w.shape() != self.dirac.shape() {
            return dim_err("conjugating unitary has the wrong size");
        }
        let res = w.unitary_residual();
        if res > 1e-9 {
            return Err(Error::Domain(format!("conjugation by a non-unitary (residual {res:e})")));
        }
        let wa = w.adjoint();
        Ok(Self {
            rep: self.rep.conjugated(w),
            dirac: &(w * &self.dirac) * &wa,
            grading: self.grading.as_ref().map(|g| &(w * g) * &wa),
            real: self.real.as_ref().map(|j| j.transform(w)),
            ko_dim: self.ko_dim,
        })
    }

    /// Same data with `D` replaced by `s D`.
    pub fn scale_dirac(&self, s: f64) -> Self {
        let mut t = self.clone();
        t.dirac = self.dirac.scale_real(s);
        t
    }
}

#[cfg(test)]
mod tests;
