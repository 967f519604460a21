use num_complex::Complex;

use super::matrix::ComplexMatrix;
use super::scalar::RealScalar;
use crate::error::{dim_err, Error, Result};

/// Antiunitary operator `J = U K`, with `K` entrywise complex conjugation.
#[derive(Clone, Debug, PartialEq)]
pub struct Antiunitary<T> {
    unitary: ComplexMatrix<T>,
}

impl<T: RealScalar> Antiunitary<T> {
    pub fn new(unitary: ComplexMatrix<T>, tol: T) -> Result<Self> {
        if !unitary.is_square() || unitary.is_empty() {
            return dim_err(format!(
                "antiunitary needs a square unitary part, got {}x{}",
                unitary.rows(),
                unitary.cols()
            ));
        }
        let res = unitary.unitary_residual();
        if res > tol {
            return Err(Error::Domain(format!("unitary part is not unitary (residual {res})")));
        }
        Ok(Self { unitary })
    }

    /// Plain complex conjugation on `C^n`.
    pub fn conjugation(n: usize) -> Self {
        Self {
            unitary: ComplexMatrix::identity(n),
        }
    }

    pub fn unitary(&self) -> &ComplexMatrix<T> {
        &self.unitary
    }

    pub fn dim(&self) -> usize {
        self.unitary.rows()
    }

    pub fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        let c: Vec<_> = v.iter().map(|z| z.conj()).collect();
        self.unitary.mul_vec(&c)
    }

    /// `J^2 = U conj(U)`, a linear operator.
    pub fn square(&self) -> ComplexMatrix<T> {
        &self.unitary * &self.unitary.conj()
    }

    /// The linear operator `J X J^{-1} = U conj(X) U^*`.
    pub fn conjugate_op(&self, x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        &(&self.unitary * &x.conj()) * &self.unitary.adjoint()
    }

    /// `W J W^*` for a unitary `W`.
    pub fn transform(&self, w: &ComplexMatrix<T>) -> Self {
        Self {
            unitary: &(w * &self.unitary) * &w.transpose(),
        }
    }

    /// Antilinear maps `J2 X` and `X J1` agree iff `U2 conj(X) = X U1`.
    pub fn intertwining_residual(target: &Self, x: &ComplexMatrix<T>, source: &Self) -> T {
        let lhs = &target.unitary * &x.conj();
        let rhs = x * &source.unitary;
        lhs.max_abs_diff(&rhs)
    }
}
