use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::report::Check;
use crate::triple::{omega_forms, validate_first_order, SpectralTriple};
use crate::CMatrix;

/// `A = sum pi(a_i) [D, pi(b_i)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneForm {
    pub pairs: Vec<(AlgebraElement, AlgebraElement)>,
    pub value: CMatrix,
}

impl OneForm {
    pub fn new(t: &SpectralTriple, pairs: Vec<(AlgebraElement, AlgebraElement)>) -> Result<Self> {
        let n = t.dim();
        let mut value = CMatrix::zeros(n, n);
        for (a, b) in &pairs {
            value += &(&t.pi(a)? * &t.commutator(b)?);
        }
        Ok(Self { pairs, value })
    }

    pub fn zero(t: &SpectralTriple) -> Self {
        Self {
            pairs: Vec::new(),
            value: CMatrix::zeros(t.dim(), t.dim()),
        }
    }

    /// Distance from the value to the degree-1 forms of `t`.
    pub fn projection_residual(&self, t: &SpectralTriple) -> Result<f64> {
        Ok(omega_forms(t, 1)?.projection_residual(&self.value))
    }
}

#[derive(Clone, Debug)]
pub struct Fluctuation {
    pub triple: SpectralTriple,
    /// Set when the one-form was replaced by its self-adjoint part.
    pub warnings: Vec<String>,
    pub zeroth_order: Check,
    pub first_order: Check,
}

/// `D + A + J A J^{-1}`.
pub fn inner_fluctuation(t: &SpectralTriple, a: &OneForm, tol: f64) -> Result<Fluctuation> {
    let j = t
        .real_structure()
        .ok_or_else(|| Error::Precondition("inner fluctuation needs a real structure".into()))?;
    let mut warnings = Vec::new();
    let res = a.value.hermitian_residual();
    let value = if res > tol {
        warnings.push(format!("one-form is not self-adjoint (residual {res:e}); using its self-adjoint part"));
        (&a.value + &a.value.adjoint()).scale_real(0.5)
    } else {
        a.value.clone()
    };
    let d = &(t.dirac() + &value) + &j.conjugate_op(&value);
    let triple = t.with_dirac(d)?;
    let (zeroth_order, first_order) = validate_first_order(&triple, tol)?;
    Ok(Fluctuation {
        triple,
        warnings,
        zeroth_order,
        first_order,
    })
}
