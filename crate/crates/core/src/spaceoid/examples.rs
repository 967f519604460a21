//! Trivial and phase-twisted spaceoids.

use num_complex::Complex64;
use rand::Rng;

use super::Spaceoid;
use crate::Result;

/// `O0, O1, ...`.
pub fn object_names(n: usize) -> Vec<String> {
    (0..n).map(|a| format!("O{a}")).collect()
}

/// Gauge twist of the trivial bundle by uniformly random phases.
pub fn random_spaceoid<R: Rng + ?Sized>(rng: &mut R, points: usize, objects: usize) -> Result<Spaceoid> {
    let trivial = Spaceoid::trivial(points, object_names(objects))?;
    let g: Vec<Vec<Vec<Complex64>>> = (0..points)
        .map(|_| {
            (0..objects)
                .map(|_| {
                    (0..objects)
                        .map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)))
                        .collect()
                })
                .collect()
        })
        .collect();
    trivial.gauge_twist(&g)
}
