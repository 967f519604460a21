use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::algebra::{spectrum, FiniteCStarAlgebra, PureState};
use crate::numkernel::{hermitian_eig, operator_norm};
use crate::triple::examples::{two_point, two_point_real_full};
use crate::triple::{Representation, SpectralTriple};
use crate::CMatrix;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn characters(t: &SpectralTriple) -> Vec<PureState> {
    spectrum(t.algebra()).unwrap().into_iter().map(PureState::from_character).collect()
}

fn check_witness(t: &SpectralTriple, w1: &PureState, w2: &PureState, r: &DistanceResult, tol: f64) {
    let x = &r.witness;
    assert!(x.is_self_adjoint(1e-12));
    let n = operator_norm(&t.commutator(x).unwrap()).unwrap();
    assert!(n <= 1.0 + 1e-7, "witness constraint {n}");
    let f = (w1.eval(x) - w2.eval(x)).re.abs();
    assert!(f >= r.value - tol, "witness value {f} vs {}", r.value);
}

#[test]
fn two_point_is_inverse_modulus() {
    for lambda in [c(0.5, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(3.0, 4.0)] {
        let t = two_point(lambda);
        let s = characters(&t);
        let r = connes_distance(&t, &s[0], &s[1], 1e-7).unwrap();
        assert!(r.converged);
        assert!((r.value - 1.0 / lambda.norm()).abs() < 1e-6, "{lambda}: {}", r.value);
        assert!(r.certified_gap < 1e-7);
        check_witness(&t, &s[0], &s[1], &r, 1e-7);
        let radius = 5.0 / lambda.norm();
        let o = distance_oracle(&t, &s[0], &s[1], radius, 201).unwrap();
        assert!((o - 1.0 / lambda.norm()).abs() <= 2.0 * radius / 200.0);
    }
}

#[test]
fn zero_and_infinite() {
    let t = two_point(c(2.0, 0.0));
    let s = characters(&t);
    let r = connes_distance(&t, &s[0], &s[0], 1e-6).unwrap();
    assert_eq!(r.value, 0.0);
    assert_eq!(distance_oracle(&t, &s[1], &s[1], 1.0, 11).unwrap(), 0.0);

    let flat = two_point(c(0.0, 0.0));
    let r = connes_distance(&flat, &s[0], &s[1], 1e-6).unwrap();
    assert!(r.is_infinite());
    // The witness lies in the kernel and separates the states.
    assert!(flat.commutator(&r.witness).unwrap().max_abs() < 1e-12);
    assert!(((s[0].eval(&r.witness) - s[1].eval(&r.witness)).re - 1.0).abs() < 1e-12);
    assert_eq!(distance_oracle(&flat, &s[0], &s[1], 1.0, 5).unwrap(), f64::INFINITY);
}

#[test]
fn rejects_foreign_states_and_bad_tolerance() {
    let t = two_point(c(1.0, 0.0));
    let big = FiniteCStarAlgebra::new(vec![1, 1, 2]).unwrap();
    let w = PureState::new(&big, 2, vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
    let s = characters(&t);
    assert!(matches!(connes_distance(&t, &w, &s[0], 1e-6), Err(Error::Domain(_))));
    assert!(matches!(connes_distance(&t, &s[0], &s[1], 0.0), Err(Error::Domain(_))));
}

#[test]
fn oracle_dimension_guard() {
    let alg = FiniteCStarAlgebra::commutative(7).unwrap();
    let rep = Representation::new(alg, vec![1; 7], None).unwrap();
    let t = SpectralTriple::new(rep, CMatrix::zeros(7, 7)).unwrap();
    let s = characters(&t);
    assert!(matches!(distance_oracle(&t, &s[0], &s[1], 1.0, 3), Err(Error::Refused(_))));
}

#[test]
fn swap_triple_distance() {
    let t = two_point_real_full(2.0);
    let s = characters(&t);
    let r = connes_distance(&t, &s[0], &s[1], 1e-8).unwrap();
    assert!((r.value - 0.5).abs() < 1e-7);
}

/// `M_2` on `C^2` with `D = diag(0, 1)`: vector states with the same
/// `|v_1|` differ only on the off-diagonal part.
#[test]
fn matrix_algebra_against_oracle() {
    let alg = FiniteCStarAlgebra::new(vec![2]).unwrap();
    let rep = Representation::new(alg.clone(), vec![1], None).unwrap();
    let t = SpectralTriple::new(rep, CMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]])).unwrap();
    let (a, phi) = (0.6f64, 1.1f64);
    let w1 = PureState::new(&alg, 0, vec![c(a.cos(), 0.0), c(a.sin(), 0.0)]).unwrap();
    let w2 = PureState::new(&alg, 0, vec![c(a.cos(), 0.0), Complex64::from_polar(a.sin(), phi)]).unwrap();
    let r = connes_distance(&t, &w1, &w2, 1e-7).unwrap();
    assert!(r.value.is_finite() && r.converged);
    check_witness(&t, &w1, &w2, &r, 1e-7);
    let (radius, steps) = (3.0, 31);
    let o = distance_oracle(&t, &w1, &w2, radius, steps).unwrap();
    let res = oracle_resolution(&t, &w1, &w2, &r, radius, steps).unwrap();
    assert!(o <= r.value + r.certified_gap + 1e-9, "oracle {o} above solver {}", r.value);
    assert!(r.value - o <= res + 1e-9, "gap {} exceeds resolution {res}", r.value - o);
    // A different first modulus gives an infinite distance.
    let w3 = PureState::new(&alg, 0, vec![c(0.2, 0.0), c(1.0, 0.0)]).unwrap();
    assert!(connes_distance(&t, &w1, &w3, 1e-7).unwrap().is_infinite());
}

#[test]
fn distance_matrix_basics() {
    let t = two_point(c(0.0, 2.0));
    let s = characters(&t);
    let m = distance_matrix(&t, &[s[0].clone(), s[0].clone()], 1e-7).unwrap();
    assert_eq!(m, vec![vec![0.0, 0.0], vec![0.0, 0.0]]);
    let m = distance_matrix(&t, &s, 1e-7).unwrap();
    assert!((m[0][1] - 0.5).abs() < 1e-6 && m[0][1] == m[1][0]);
    assert!(distance_matrix(&t, &s[..1], 1e-7).is_err());
}

/// Commutative three-point triple with a random Hermitian `D`.
fn three_point(entries: &[f64]) -> SpectralTriple {
    let alg = FiniteCStarAlgebra::commutative(3).unwrap();
    let rep = Representation::new(alg, vec![1, 1, 1], None).unwrap();
    let a = CMatrix::from_fn(3, 3, |i, j| c(entries[(3 * i + j) % entries.len()], entries[(i + 5 * j + 1) % entries.len()]));
    SpectralTriple::new(rep, &a + &a.adjoint()).unwrap()
}

fn random_unitary(n: usize, seed: &[f64]) -> CMatrix {
    let a = CMatrix::from_fn(n, n, |i, j| c(seed[(i * n + j) % seed.len()], seed[(i + j * n + 3) % seed.len()] * 0.7));
    hermitian_eig(&(&a + &a.adjoint())).unwrap().vectors
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn three_point_metric_laws(e in prop::collection::vec(-1.0f64..1.0, 9), lam in 0.3f64..3.0) {
        let t = three_point(&e);
        let s = characters(&t);
        let tol = 1e-7;
        let m = distance_matrix(&t, &s, tol).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    if m[i][j].is_finite() && m[j][k].is_finite() {
                        prop_assert!(m[i][k] <= m[i][j] + m[j][k] + 1e-6);
                    }
                }
            }
        }
        let back = connes_distance(&t, &s[1], &s[0], tol).unwrap().value;
        if m[0][1].is_finite() {
            prop_assert!((back - m[0][1]).abs() <= 2.0 * tol);
            let scaled = connes_distance(&t.scale_dirac(lam), &s[0], &s[1], tol).unwrap().value;
            prop_assert!((scaled - m[0][1] / lam).abs() <= 2.0 * tol * (1.0 + m[0][1]));
        } else {
            prop_assert!(back.is_infinite());
        }
    }

    #[test]
    fn solver_dominates_oracle(e in prop::collection::vec(-1.0f64..1.0, 9)) {
        let t = three_point(&e);
        let s = characters(&t);
        let r = connes_distance(&t, &s[0], &s[2], 1e-7).unwrap();
        prop_assume!(r.value.is_finite());
        check_witness(&t, &s[0], &s[2], &r, 1e-7);
        let (radius, steps) = (2.0, 41);
        let o = distance_oracle(&t, &s[0], &s[2], radius, steps).unwrap();
        let res = oracle_resolution(&t, &s[0], &s[2], &r, radius, steps).unwrap();
        prop_assert!(o <= r.value + r.certified_gap + 1e-9);
        prop_assert!(r.value - o <= res + 1e-9);
    }

    #[test]
    fn unitary_invariance(e in prop::collection::vec(-1.0f64..1.0, 9), seed in prop::collection::vec(-1.0f64..1.0, 6)) {
        let t = three_point(&e);
        let u = t.conjugate(&random_unitary(3, &seed)).unwrap();
        let s = characters(&t);
        let a = connes_distance(&t, &s[0], &s[1], 1e-7).unwrap().value;
        let b = connes_distance(&u, &s[0], &s[1], 1e-7).unwrap().value;
        if a.is_finite() {
            prop_assert!((a - b).abs() <= 2e-7 * (1.0 + a));
        } else {
            prop_assert!(b.is_infinite());
        }
    }
}

#[test]
fn oracle_refines_monotonically() {
    let t = three_point(&[0.3, -0.8, 0.5, 0.1, 0.9, -0.4, 0.2, 0.7, -0.6]);
    let s = characters(&t);
    let mut prev = 0.0;
    for steps in [3, 5, 9, 17, 33] {
        let o = distance_oracle(&t, &s[0], &s[1], 1.0, steps).unwrap();
        assert!(o >= prev - 1e-15);
        prev = o;
    }
    let wide = distance_oracle(&t, &s[0], &s[1], 4.0, 33).unwrap();
    assert!((wide - prev).abs() < 1e-12);
}
