//! Finite noncommutative geometry: spectral triples, Connes distances,
//! Morita morphisms and the Gel'fand duality for finite commutative
//! C*-categories.

pub mod algebra;
pub mod bimodules;
pub mod cstarcat;
pub mod distance;
pub mod error;
pub mod morphisms;
pub mod numkernel;
pub mod report;
pub mod spaceoid;
pub mod triple;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Double-precision complex matrix used throughout the higher modules.
pub type CMatrix = numkernel::ComplexMatrix<f64>;
pub type CEigen = numkernel::HermitianEigen<f64>;
pub type CAntiunitary = numkernel::Antiunitary<f64>;

/// Default absolute comparison tolerance for validators.
pub const DEFAULT_TOL: f64 = 1e-9;
