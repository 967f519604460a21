//! Dense complex linear algebra, generic over the real field.

mod antiunitary;
mod decomp;
mod matrix;
mod scalar;

pub use antiunitary::Antiunitary;
pub use decomp::{
    distance_to_span, fix_phase, hermitian_eig, lstsq, null_space, operator_norm, rank,
    span_basis, svd, top_singular_pair, HermitianEigen, Svd,
};
pub use matrix::{direct_sum, kron, ComplexMatrix};
pub use scalar::{cone, creal, czero, RealScalar};
