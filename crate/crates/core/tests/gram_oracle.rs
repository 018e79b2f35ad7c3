//! Fast Gram assembly against the permutation-sum oracle.

use proptest::prelude::*;
use qfock::fock::{q_factorial, DEFAULT_ORACLE_LIMIT};
use qfock::{build_space, q_gram, q_gram_bruteforce, FockBasis, GramCache, RepresentationSpec};

fn max_diff(n_fixed: usize, lambdas: Vec<f64>, q: f64, n: usize) -> f64 {
    let ctx = build_space(RepresentationSpec::new(n_fixed, lambdas)).unwrap();
    let fast = q_gram(&ctx, q, n).unwrap();
    let slow = q_gram_bruteforce(&ctx, q, n, DEFAULT_ORACLE_LIMIT).unwrap();
    fast.iter()
        .zip(slow.iter())
        .map(|(a, b)| (b - a).norm())
        .fold(0.0, f64::max)
}

#[test]
fn rotation_and_fixed_letters_agree() {
    for &q in &[-0.9, -0.5, 0.0, 0.5, 0.9] {
        for n in 0..=4 {
            assert!(max_diff(1, vec![2.0], q, n) < 1e-10);
            assert!(max_diff(0, vec![3.0], q, n) < 1e-10);
        }
    }
}

#[test]
fn powers_of_one_letter() {
    let basis = FockBasis::new(1, 8).unwrap();
    for &q in &[-0.9, -0.3, 0.0, 0.6] {
        let cache = GramCache::build(&basis, q).unwrap();
        for n in 0..=8 {
            let g = cache.degree_matrix(n);
            assert!((g[(0, 0)] - q_factorial(q, n)).abs() < 1e-12 * q_factorial(q, n).max(1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn random_q_matches_oracle(q in -0.95f64..0.95, n in 0usize..5, lambda in 1.1f64..6.0) {
        prop_assert!(max_diff(1, vec![lambda], q, n) < 1e-10);
    }

    #[test]
    fn gram_is_symmetric_positive(q in -0.95f64..0.95, n in 1usize..5) {
        let ctx = build_space(RepresentationSpec::new(2, vec![2.0])).unwrap();
        let g = q_gram(&ctx, q, n).unwrap();
        prop_assert!((&g - g.transpose()).abs().max() < 1e-14);
        let min = g.symmetric_eigenvalues().min();
        prop_assert!(min > 0.0);
    }
}
