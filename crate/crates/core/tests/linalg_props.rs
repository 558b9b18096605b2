use proptest::prelude::*;
use qms_core::linalg::random::{haar_unitary, random_complex, random_hermitian};
use qms_core::linalg::{hermitian_eigen, operator_norm, rank, right_svd, Matrix};
use qms_core::rng::rng_from_seed;
use qms_core::ComplexMatrix;

fn unitarity_defect<T: qms_core::Real>(u: &Matrix<T>) -> T {
    u.adjoint_mul(u).max_abs_diff(&Matrix::identity(u.cols()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigen_reconstructs(seed in any::<u64>(), n in 1usize..9) {
        let a: ComplexMatrix = random_hermitian(&mut rng_from_seed(seed), n);
        let e = hermitian_eigen(&a).unwrap();
        prop_assert!(e.reconstruct().max_abs_diff(&a) <= 1e-10 * (1.0 + a.max_abs()));
        prop_assert!(unitarity_defect(&e.eigenvectors) <= 1e-10);
        prop_assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn single_precision_eigen(seed in any::<u64>(), n in 1usize..6) {
        let a: Matrix<f32> = random_hermitian(&mut rng_from_seed(seed), n);
        let e = hermitian_eigen(&a).unwrap();
        prop_assert!(e.reconstruct().max_abs_diff(&a) <= 1e-4 * (1.0 + a.max_abs()));
    }

    #[test]
    fn operator_norm_is_unitarily_invariant(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = rng_from_seed(seed);
        let a: ComplexMatrix = random_complex(&mut rng, n, n);
        let (u, v): (ComplexMatrix, ComplexMatrix) = (haar_unitary(&mut rng, n), haar_unitary(&mut rng, n));
        let b = &(&u * &a) * &v;
        prop_assert!((operator_norm(&a) - operator_norm(&b)).abs() <= 1e-9 * (1.0 + operator_norm(&a)));
    }

    #[test]
    fn singular_values_match_gram_spectrum(seed in any::<u64>(), rows in 1usize..7, cols in 1usize..7) {
        let a: ComplexMatrix = random_complex(&mut rng_from_seed(seed), rows, cols);
        let svd = right_svd(&a);
        let mut gram = hermitian_eigen(&a.adjoint_mul(&a)).unwrap().eigenvalues;
        gram.reverse();
        for (s, g) in svd.singular_values.iter().zip(&gram) {
            prop_assert!((s * s - g.max(0.0)).abs() <= 1e-9 * (1.0 + gram[0]));
        }
        prop_assert_eq!(rank(&a, 1e-10), rows.min(cols));
    }
}
