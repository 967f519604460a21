use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real field the kernel is generic over. Implemented for `f32` and `f64`.
pub trait RealScalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    /// Relative convergence threshold of the eigensolver, never below 1e-13.
    fn jacobi_tol() -> Self {
        let floor = Self::lit(1e-13);
        let eps = Self::epsilon() * Self::lit(10.0);
        if eps > floor {
            eps
        } else {
            floor
        }
    }
}

impl RealScalar for f32 {}
impl RealScalar for f64 {}

pub fn czero<T: RealScalar>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

pub fn cone<T: RealScalar>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

pub fn creal<T: RealScalar>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}
