//! Invariants checked through the public API only.

use ncg_forge::cstarcat::examples::random_unitary;
use ncg_forge::distance::connes_distance;
use ncg_forge::triple::examples::{ko_triple, random_pure_state, random_triple};
use ncg_forge::triple::{axiom_report, sign_table, validate_real};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn real_structure_survives_unitary_equivalence(seed in any::<u64>(), n in 0u8..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = ko_triple(n);
        let u = t.conjugate(&random_unitary(&mut rng, t.dim())).unwrap();
        prop_assert_eq!(u.ko_dim(), Some(n));
        let r = validate_real(&u, 1e-9).unwrap();
        prop_assert!(r.passed(), "{:?}", r.failures().map(|c| &c.name).collect::<Vec<_>>());
        let before: Vec<_> = axiom_report(&t, 1e-9).unwrap().checks.iter().map(|c| (c.name.clone(), c.status)).collect();
        let after: Vec<_> = axiom_report(&u, 1e-9).unwrap().checks.iter().map(|c| (c.name.clone(), c.status)).collect();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn distance_survives_unitary_equivalence(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_triple(&mut rng, 5).unwrap();
        let u = t.conjugate(&random_unitary(&mut rng, t.dim())).unwrap();
        let a = random_pure_state(&mut rng, t.algebra()).unwrap();
        let b = random_pure_state(&mut rng, t.algebra()).unwrap();
        let d = connes_distance(&t, &a, &b, 1e-8).unwrap().value;
        let e = connes_distance(&u, &a, &b, 1e-8).unwrap().value;
        if d.is_finite() {
            prop_assert!((d - e).abs() <= 2e-6, "{d} vs {e}");
        } else {
            prop_assert!(e.is_infinite());
        }
        prop_assert!(connes_distance(&t, &a, &a, 1e-8).unwrap().value.abs() <= 1e-9);
    }
}

#[test]
fn ko_labels_have_distinct_sign_rows() {
    for n in 0..8u8 {
        assert_eq!(ko_triple(n).ko_dim(), Some(n));
        assert_eq!(ko_triple(n).grading().is_some(), n % 2 == 0);
    }
    for n in 0..8u8 {
        for m in 0..8u8 {
            assert_eq!(sign_table(n) == sign_table(m), n == m, "{n} {m}");
        }
    }
}
