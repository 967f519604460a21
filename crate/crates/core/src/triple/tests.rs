use num_complex::Complex64;
use proptest::prelude::*;

use super::examples::*;
use super::*;
use crate::algebra::{FiniteCStarAlgebra, MatrixUnit};
use crate::numkernel::{hermitian_eig, operator_norm};
use crate::report::Status;
use crate::{CAntiunitary, CMatrix, Error, DEFAULT_TOL};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_unitary(n: usize, seed: &[f64]) -> CMatrix {
    let mut k = 0;
    let mut next = || {
        k += 1;
        seed[k % seed.len()] * (k as f64).sin()
    };
    let a = CMatrix::from_fn(n, n, |_, _| c(next(), next()));
    let h = &a + &a.adjoint();
    hermitian_eig(&h).unwrap().vectors
}

/// Transcription of the printed table: J^2 row, then the `[J,D]_{+-}` row
/// and `[J,Gamma]_{+-}` row, where '-' marks a vanishing commutator.
const PRINTED_TABLE: [(&str, &str, &str); 8] = [
    ("+", "-", "-"),
    ("+", "+", ""),
    ("-", "-", "+"),
    ("-", "-", ""),
    ("-", "-", "-"),
    ("-", "+", ""),
    ("+", "-", "+"),
    ("+", "-", ""),
];

#[test]
fn sign_table_matches_printed_rows() {
    for (n, (sq, jd, jg)) in PRINTED_TABLE.iter().enumerate() {
        let s = sign_table(n as u8);
        assert_eq!(s.j_square, if *sq == "+" { 1 } else { -1 }, "n = {n}");
        // A vanishing commutator means JD = DJ.
        assert_eq!(s.j_dirac, if *jd == "-" { 1 } else { -1 }, "n = {n}");
        let g = match *jg {
            "" => None,
            "-" => Some(1),
            _ => Some(-1),
        };
        assert_eq!(s.j_grading, g, "n = {n}");
    }
    assert_eq!(sign_table(10), sign_table(2));
}

#[test]
fn ko_triples_pass_only_their_own_row() {
    for n in 0..8u8 {
        let t = ko_triple(n);
        let own = validate_real(&t, DEFAULT_TOL).unwrap();
        assert!(own.passed(), "n = {n}: {:?}", own);
        for m in 0..8u8 {
            if m == n {
                continue;
            }
            let relabeled = t.clone().with_ko_dim(Some(m)).unwrap();
            let (want, got) = (sign_table(m), sign_table(n));
            match validate_real(&relabeled, DEFAULT_TOL) {
                Err(Error::Precondition(msg)) => {
                    assert!(want.j_grading.is_some() && t.grading().is_none(), "{n} as {m}");
                    assert!(msg.contains("[J,Gamma]"), "{msg}");
                }
                Err(e) => panic!("{n} as {m}: {e}"),
                Ok(r) => {
                    assert!(!r.passed(), "{n} relabeled {m} should fail");
                    for f in r.failures() {
                        let differs = match f.name.as_str() {
                            "j-square" => want.j_square != got.j_square,
                            "j-dirac" => want.j_dirac != got.j_dirac,
                            "j-grading" => want.j_grading != got.j_grading,
                            other => panic!("unexpected failure {other}"),
                        };
                        assert!(differs, "{n} as {m}: {} failed without a row difference", f.name);
                    }
                }
            }
        }
    }
}

#[test]
fn odd_label_with_grading_names_parity() {
    let t = ko_triple(0).with_ko_dim(Some(7)).unwrap();
    let r = validate_real(&t, DEFAULT_TOL).unwrap();
    let g = r.get("j-grading").unwrap();
    assert_eq!(g.status, Status::Fail);
    assert!(g.detail.contains("odd"));
}

#[test]
fn scalar_real_triple() {
    assert!(validate_real(&scalar_real(0), DEFAULT_TOL).unwrap().passed());
    let r = validate_real(&scalar_real(2), DEFAULT_TOL).unwrap();
    let sq = r.get("j-square").unwrap();
    assert_eq!(sq.status, Status::Fail);
    assert_eq!(sq.detail, "required -, found +");
    assert!((sq.residual.unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn validate_real_preconditions() {
    let t = two_point_even(c(1.0, 0.0));
    assert!(matches!(validate_real(&t, DEFAULT_TOL), Err(Error::Precondition(_))));
    let no_label = t.with_real_structure(CAntiunitary::conjugation(2), None).unwrap();
    assert!(matches!(validate_real(&no_label, DEFAULT_TOL), Err(Error::Precondition(_))));
    assert!(matches!(
        two_point(c(1.0, 0.0)).with_real_structure(CAntiunitary::conjugation(2), Some(9)),
        Err(Error::Domain(_))
    ));
}

#[test]
fn conjugation_on_two_points_breaks_first_order() {
    // [[D, e1], e1] = lambda s_x.
    for lambda in [0.5, 2.0] {
        let r = validate_real(&two_point_real(lambda), DEFAULT_TOL).unwrap();
        assert_eq!(r.get("zeroth-order").unwrap().status, Status::Pass);
        assert_eq!(r.get("j-square").unwrap().status, Status::Pass);
        assert_eq!(r.get("j-dirac").unwrap().status, Status::Pass);
        assert_eq!(r.get("j-grading").unwrap().status, Status::Pass);
        let f = r.get("first-order").unwrap();
        assert!((f.residual.unwrap() - lambda).abs() < 1e-12);
    }
    assert!(validate_real(&two_point_real(0.0), DEFAULT_TOL).unwrap().passed());
}

#[test]
fn swap_real_structure_is_fully_real() {
    let t = two_point_real_full(1.5);
    assert!(validate_real(&t, DEFAULT_TOL).unwrap().passed());
    assert!(validate_even(&t, DEFAULT_TOL).unwrap().passed());
    assert!(is_irreducible(&t).unwrap());
}

#[test]
fn validate_even_examples() {
    let d = c(0.3, -1.2);
    assert!(validate_even(&two_point_even(d), DEFAULT_TOL).unwrap().passed());

    let t = two_point(d).with_grading(CMatrix::identity(2)).unwrap();
    let r = validate_even(&t, DEFAULT_TOL).unwrap();
    let a = r.get("grading-anticommutes-dirac").unwrap();
    assert_eq!(a.status, Status::Fail);
    assert!((a.residual.unwrap() - 2.0 * d.norm()).abs() < 1e-12);

    let m2 = FiniteCStarAlgebra::new(vec![2]).unwrap();
    let rep = Representation::new(m2, vec![1], None).unwrap();
    let t = SpectralTriple::new(rep, CMatrix::zeros(2, 2)).unwrap().with_grading(pauli_z()).unwrap();
    let r = validate_even(&t, DEFAULT_TOL).unwrap();
    // [s_z, E_01] = 2 E_01.
    let g = r.get("grading-commutes-algebra").unwrap();
    assert_eq!(g.status, Status::Fail);
    assert!((g.residual.unwrap() - 2.0).abs() < 1e-12);

    assert!(matches!(validate_even(&two_point(d), DEFAULT_TOL), Err(Error::Precondition(_))));
}

#[test]
fn representation_layout() {
    let alg = FiniteCStarAlgebra::new(vec![1, 2]).unwrap();
    let rep = Representation::new(alg.clone(), vec![2, 1], None).unwrap();
    assert_eq!(rep.dim(), 4);
    let x = alg.matrix_unit(MatrixUnit { block: 1, row: 0, col: 1 });
    let p = rep.pi(&x).unwrap();
    assert_eq!(p[(2, 3)], c(1.0, 0.0));
    assert!((p.frobenius_norm() - 1.0).abs() < 1e-15);
    let one = rep.pi(&alg.unit()).unwrap();
    assert!(one.approx_eq(&CMatrix::identity(4), 0.0));
    assert!(Representation::new(alg.clone(), vec![1], None).is_err());
    assert!(Representation::new(alg, vec![1, 1], Some(CMatrix::identity(2))).is_err());
}

#[test]
fn rejects_non_hermitian_dirac() {
    let rep = Representation::new(FiniteCStarAlgebra::commutative(2).unwrap(), vec![1, 1], None).unwrap();
    let d = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
    assert!(matches!(SpectralTriple::new(rep, d), Err(Error::Domain(_))));
}

#[test]
fn evaluate_chain_by_hand() {
    let t = two_point(c(2.0, 1.0));
    let alg = t.algebra().clone();
    let ch = HochschildChain::new(alg.clone(), 1, vec![(c(1.0, 0.0), vec![alg.block_unit(0), alg.block_unit(1)])])
        .unwrap();
    // e1 [D, e2] keeps the (0,1) entry conj(lambda) of D.
    let want = CMatrix::from_rows(&[vec![c(0.0, 0.0), c(2.0, -1.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]]).unwrap();
    assert!(evaluate_chain(&t, &ch).unwrap().approx_eq(&want, 1e-15));
}

#[test]
fn two_point_orientation() {
    let t = two_point_even(c(1.0, 0.0));
    let c0 = find_orientation_cycle(&t, 0).unwrap().expect("e1 - e2 represents Gamma");
    let coords = c0.coordinates().unwrap();
    assert!((coords[0] - c(1.0, 0.0)).norm() < 1e-12 && (coords[1] + c(1.0, 0.0)).norm() < 1e-12);
    assert!(validate_orientability(&t, &c0, DEFAULT_TOL).unwrap().passed());
    // Degree-1 forms are off-diagonal; Gamma is diagonal.
    assert!(find_orientation_cycle(&t, 1).unwrap().is_none());
    // Degree-2 cycles all evaluate to zero here.
    assert!(find_orientation_cycle(&t, 2).unwrap().is_none());
}

#[test]
fn wrong_cycle_fails_orientability() {
    let t = two_point_even(c(1.0, 0.0));
    let alg = t.algebra().clone();
    let ch = HochschildChain::new(alg.clone(), 1, vec![(c(1.0, 0.0), vec![alg.block_unit(0), alg.block_unit(1)])])
        .unwrap();
    let r = validate_orientability(&t, &ch, DEFAULT_TOL).unwrap();
    assert!(!r.passed());
}

#[test]
fn swap_triple_has_no_algebra_valued_orientation() {
    let t = two_point_real_full(1.0);
    // Every form lives in M_2 (x) 1, which does not contain s_z (x) s_z.
    let f = omega_forms(&t, 2).unwrap();
    let right = kron(&CMatrix::identity(2), &pauli_x());
    for w in &f.basis {
        assert!(CMatrix::commutator(w, &right).max_abs() < 1e-12);
    }
    for n in 0..=2 {
        assert!(find_orientation_cycle(&t, n).unwrap().is_none());
    }
    let r = axiom_report(&t, DEFAULT_TOL).unwrap();
    assert_eq!(r.get("orientable").unwrap().status, Status::Fail);
    assert_eq!(r.get("real").unwrap().status, Status::Pass);
}

use crate::numkernel::kron;

#[test]
fn boundary_squares_to_zero() {
    for blocks in [vec![2], vec![1, 1, 1], vec![1, 2]] {
        let alg = FiniteCStarAlgebra::new(blocks).unwrap();
        let b2 = boundary_matrix(&alg, 2).unwrap();
        let b1 = boundary_matrix(&alg, 1).unwrap();
        assert_eq!((&b1 * &b2).max_abs(), 0.0);
    }
}

#[test]
fn boundary_by_hand() {
    // b(a0 (x) a1) = a0 a1 - a1 a0.
    let alg = FiniteCStarAlgebra::new(vec![2]).unwrap();
    let e = |r, c| alg.matrix_unit(MatrixUnit { block: 0, row: r, col: c });
    let ch = HochschildChain::new(alg.clone(), 1, vec![(c(1.0, 0.0), vec![e(0, 1), e(1, 0)])]).unwrap();
    let b = ch.boundary_coordinates().unwrap();
    assert_eq!(b, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
}

#[test]
fn chain_dimension_is_capped() {
    let alg = FiniteCStarAlgebra::new(vec![3]).unwrap();
    assert!(matches!(boundary_matrix(&alg, 3), Err(Error::Refused(_))));
}

#[test]
fn omega_forms_two_point() {
    let t = two_point(c(1.0, 0.0));
    assert_eq!(omega_forms(&t, 0).unwrap().dim(), 2);
    assert_eq!(omega_forms(&t, 1).unwrap().dim(), 4);
    let flat = two_point(c(0.0, 0.0));
    assert_eq!(omega_forms(&flat, 3).unwrap().dim(), 2);
    let f = omega_forms(&t, 1).unwrap();
    assert!(f.left_closure_residual(&t) < 1e-12);
}

#[test]
fn irreducibility_examples() {
    let m2 = FiniteCStarAlgebra::new(vec![2]).unwrap();
    let rep = Representation::new(m2, vec![1], None).unwrap();
    let t = SpectralTriple::new(rep, pauli_z()).unwrap();
    assert!(is_irreducible(&t).unwrap());

    assert!(is_irreducible(&two_point(c(0.7, 0.2))).unwrap());
    // D = 0: both diagonal projections commute with everything.
    assert_eq!(commutant_dimension(&two_point(c(0.0, 0.0))).unwrap(), 2);

    let scalars = Representation::new(FiniteCStarAlgebra::new(vec![1]).unwrap(), vec![2], None).unwrap();
    let t = SpectralTriple::new(scalars, CMatrix::zeros(2, 2)).unwrap();
    assert_eq!(commutant_dimension(&t).unwrap(), 4);
    // J = conjugation cuts the Hermitian commutant to real symmetric matrices.
    let t = t.with_real_structure(CAntiunitary::conjugation(2), Some(7)).unwrap();
    assert_eq!(commutant_dimension(&t).unwrap(), 3);
}

#[test]
fn axiom_report_statuses() {
    let r = axiom_report(&two_point_even(c(1.0, 0.0)), DEFAULT_TOL).unwrap();
    let status = |n: &str| r.get(n).unwrap().status;
    assert_eq!(status("dirac-self-adjoint"), Status::Pass);
    assert_eq!(status("compact-resolvent"), Status::Trivial);
    assert_eq!(status("theta-summable"), Status::Trivial);
    assert_eq!(status("n-dimensionality"), Status::NotApplicable);
    assert_eq!(status("even"), Status::Pass);
    assert_eq!(status("real"), Status::NotSupplied);
    assert_eq!(status("orientable"), Status::Pass);
    assert_eq!(status("irreducible"), Status::Pass);
    assert!(r.passed());

    let r = axiom_report(&two_point_real(1.0), DEFAULT_TOL).unwrap();
    let real = r.get("real").unwrap();
    assert_eq!(real.status, Status::Fail);
    assert!(real.detail.contains("first-order"));
}

#[test]
fn conjugate_scales_dirac_norm() {
    let t = two_point_even(c(1.0, 1.0));
    let s = t.scale_dirac(3.0);
    let a = operator_norm(t.dirac()).unwrap();
    let b = operator_norm(s.dirac()).unwrap();
    assert!((b - 3.0 * a).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn real_validation_is_unitarily_invariant(n in 0u8..8, m in 0u8..8, seed in prop::collection::vec(-1.0f64..1.0, 7)) {
        let t = ko_triple(n).with_ko_dim(Some(m)).unwrap();
        let w = random_unitary(t.dim(), &seed);
        let u = t.conjugate(&w).unwrap();
        let a = validate_real(&t, 1e-8).map(|r| r.passed()).ok();
        let b = validate_real(&u, 1e-8).map(|r| r.passed()).ok();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn irreducibility_is_unitarily_invariant(re in -2.0f64..2.0, im in -2.0f64..2.0, seed in prop::collection::vec(-1.0f64..1.0, 5)) {
        let t = two_point_even(c(re, im));
        let w = random_unitary(2, &seed);
        let u = t.conjugate(&w).unwrap();
        prop_assert_eq!(commutant_dimension(&t).unwrap(), commutant_dimension(&u).unwrap());
        prop_assert_eq!(validate_even(&t, 1e-9).unwrap().passed(), validate_even(&u, 1e-9).unwrap().passed());
    }

    #[test]
    fn omega_forms_are_nested(re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let alg = FiniteCStarAlgebra::new(vec![1, 2]).unwrap();
        let rep = Representation::new(alg, vec![1, 1], None).unwrap();
        let d = CMatrix::from_fn(3, 3, |i, j| if i == j { c(0.0, 0.0) } else if i < j { c(re, im) } else { c(re, -im) });
        let t = SpectralTriple::new(rep, d).unwrap();
        let f1 = omega_forms(&t, 1).unwrap();
        let f2 = omega_forms(&t, 2).unwrap();
        for w in &f1.basis {
            prop_assert!(f2.projection_residual(w) < 1e-9);
        }
        prop_assert!(f2.left_closure_residual(&t) < 1e-9);
    }
}

