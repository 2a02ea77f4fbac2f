use isoclinic_core::io::{format_cmat, parse_cmat};
use isoclinic_core::isoclinic::canonical_angles;
use isoclinic_core::linalg::{c64, polar_decompose, svd, ComplexMatrix, Subspace};
use isoclinic_core::pauli::PauliOperator;
use isoclinic_core::sampling::{complex_gaussian, haar_unitary, random_subspace};
use isoclinic_core::Tolerance;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pauli(n: usize) -> impl Strategy<Value = PauliOperator> {
    (0u8..4, prop::collection::vec(any::<bool>(), n), prop::collection::vec(any::<bool>(), n))
        .prop_map(|(phase, x, z)| PauliOperator::from_bits(phase, &x, &z).unwrap())
}

fn finite() -> impl Strategy<Value = f64> {
    any::<f64>().prop_filter("finite", |x| x.is_finite())
}

fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cmat_roundtrip(rows in 1usize..4, cols in 1usize..4, vals in prop::collection::vec((finite(), finite()), 16)) {
        let m = ComplexMatrix::from_fn(rows, cols, |i, j| {
            let (re, im) = vals[i * cols + j];
            c64(re, im)
        });
        let back = parse_cmat(&format_cmat(&m).unwrap()).unwrap();
        for (a, b) in m.iter().zip(back.iter()) {
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn pauli_product_matches_dense((a, b) in (pauli(3), pauli(3))) {
        let prod = a.mul(&b).unwrap().to_matrix().unwrap();
        let dense = a.to_matrix().unwrap() * b.to_matrix().unwrap();
        prop_assert_eq!(max_abs(&(prod - dense)), 0.0);
    }

    #[test]
    fn pauli_commutation_matches_dense((a, b) in (pauli(3), pauli(3))) {
        let (ma, mb) = (a.to_matrix().unwrap(), b.to_matrix().unwrap());
        let dense = max_abs(&(&ma * &mb - &mb * &ma)) == 0.0;
        prop_assert_eq!(a.commutes(&b).unwrap(), dense);
        prop_assert_eq!(b.commutes(&a).unwrap(), dense);
    }

    #[test]
    fn pauli_display_parses_back(a in pauli(5)) {
        let back: PauliOperator = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn pauli_adjoint_inverts(a in pauli(4)) {
        prop_assert!(a.mul(&a.adjoint()).unwrap() == PauliOperator::identity(4));
    }

    #[test]
    fn svd_reconstructs(seed in any::<u64>(), rows in 1usize..7, cols in 1usize..7, rank in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // low rank inputs are where a broken complex SVD shows up
        let m = complex_gaussian(&mut rng, rows, rank) * complex_gaussian(&mut rng, rank, cols);
        let f = svd(&m).unwrap();
        prop_assert!(f.singular_values.windows(2).all(|w| w[0] >= w[1]));
        let sigma = ComplexMatrix::from_diagonal(
            &f.singular_values.iter().map(|&s| c64(s, 0.0)).collect::<Vec<_>>().into(),
        );
        let rebuilt = &f.u * sigma * f.v.adjoint();
        prop_assert!(max_abs(&(rebuilt - &m)) <= 1e-12 * (1.0 + f.singular_values[0]));
    }

    #[test]
    fn polar_factors_rebuild(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = complex_gaussian(&mut rng, n, n);
        let p = polar_decompose(&a, &Tolerance::default()).unwrap();
        prop_assert!(max_abs(&(&p.isometry * &p.positive_part - &a)) < 1e-11);
        prop_assert!(max_abs(&(&p.positive_part - p.positive_part.adjoint())) < 1e-12);
    }

    #[test]
    fn angles_are_unitarily_invariant(seed in any::<u64>(), n in 2usize..7, kv in 1usize..4, kw in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (kv, kw) = (kv.min(n), kw.min(n));
        let v = random_subspace(&mut rng, n, kv);
        let w = random_subspace(&mut rng, n, kw);
        let u = haar_unitary(&mut rng, n);
        let tol = Tolerance::default();
        let rotate = |s: &Subspace| Subspace::from_orthonormal(&u * s.basis(), &tol).unwrap();
        let before = canonical_angles(&v, &w).unwrap();
        let after = canonical_angles(&rotate(&v), &rotate(&w)).unwrap();
        let swapped = canonical_angles(&w, &v).unwrap();
        prop_assert_eq!(before.angles.len(), kv.min(kw));
        for ((a, b), c) in before.angles.iter().zip(&after.angles).zip(&swapped.angles) {
            prop_assert!((0.0..=std::f64::consts::FRAC_PI_2).contains(a));
            prop_assert!((a - b).abs() < 1e-9);
            prop_assert!((a - c).abs() < 1e-9);
        }
    }

    #[test]
    fn threshold_is_monotone(abs in 0.0f64..1e-6, rel in 0.0f64..1e-6, x in 0.0f64..1e6, dx in 0.0f64..1e6) {
        let tol = Tolerance::new(abs, rel).unwrap();
        prop_assert!(tol.threshold(x) <= tol.threshold(x + dx));
        prop_assert!(tol.accepts(tol.threshold(x), x));
    }
}
