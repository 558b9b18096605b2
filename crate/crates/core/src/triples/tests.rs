use num_complex::Complex;
use proptest::prelude::*;

use super::*;
use crate::linalg::{hermitian_eigenvalues, pauli};
use crate::rng::rng_from_seed;
use crate::C64;

fn one_point() -> LipschitzTriple {
    LipschitzTriple::odd(OperatorSystem::full_matrix_algebra(1), ComplexMatrix::identity(1)).unwrap()
}

fn pauli_even() -> LipschitzTriple {
    let [x, _, z] = pauli::<f64>();
    LipschitzTriple::even(OperatorSystem::diagonal(2), x, z).unwrap()
}

fn elementary(x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter().flat_map(|a| y.iter().map(move |b| a * b)).collect()
}

#[test]
fn validation_rejects_bad_triples() {
    let [x, y, z] = pauli::<f64>();
    let diag = OperatorSystem::diagonal(2);
    let full = OperatorSystem::full_matrix_algebra(2);
    assert!(matches!(LipschitzTriple::odd(diag.clone(), y.scale(Complex::new(0.0, 1.0))), Err(QmsError::NotHermitian { .. })));
    assert!(matches!(LipschitzTriple::new(diag.clone(), x.clone(), None, Parity::Even), Err(QmsError::ParityMismatch(_))));
    assert!(matches!(LipschitzTriple::new(diag.clone(), x.clone(), Some(z.clone()), Parity::Odd), Err(QmsError::ParityMismatch(_))));
    // γ must commute with the algebra.
    assert!(matches!(LipschitzTriple::even(full, x.clone(), z.clone()), Err(QmsError::InvalidTriple(_))));
    // γ must anticommute with D.
    assert!(matches!(LipschitzTriple::even(diag.clone(), z.clone(), z.clone()), Err(QmsError::InvalidTriple(_))));
    // span{I, σ₁, σ₃} is an operator system but not an algebra.
    let not_alg = OperatorSystem::new(2, vec![ComplexMatrix::identity(2), x.clone(), z]).unwrap();
    assert!(matches!(LipschitzTriple::odd(not_alg, x), Err(QmsError::InvalidTriple(_))));
}

#[test]
fn stabilize_basic_examples() {
    let t = pauli_even();
    let t1 = stabilize(&t, 1);
    assert_eq!(t1.dirac(), t.dirac());
    assert_eq!(t1.grading(), t.grading());
    let t2 = stabilize(&t, 2);
    assert_eq!(t2.hilbert_dim(), 4);
    assert!(t2.grading_residual() < 1e-12);
    // Scalar matrices M_2(ℂ) ⊗ I lie in the kernel.
    let mut rng = rng_from_seed(80);
    let v = random_complex::<f64>(&mut rng, 2, 2);
    let scalar = kron(&v, &ComplexMatrix::identity(2));
    assert!(t2.system().contains(&scalar));
    assert!(t2.seminorm().eval(1, &scalar).unwrap() < 1e-12);
}

#[test]
fn stabilized_seminorm_matches_forgotten_base() {
    let mut rng = rng_from_seed(81);
    let t = sample_triple(3, Parity::Odd, &mut rng).unwrap();
    let st = stabilize(&t, 2);
    let base = t.seminorm();
    for _ in 0..50 {
        let s = 2;
        let x = t.system().random_element(s * 2, &mut rng);
        let nested = t.system().restore_subdivisions(&x, 2).unwrap();
        let a = st.seminorm().eval(s, nested.realization()).unwrap();
        let b = base.eval(4, t.system().forget_subdivisions(&nested).unwrap().realization()).unwrap();
        assert!((a - b).abs() <= 1e-12 * (1.0 + b));
    }
}

#[test]
fn stabilize_composes() {
    let mut rng = rng_from_seed(82);
    let t = sample_triple(2, Parity::Even, &mut rng).unwrap();
    let twice = stabilize(&stabilize(&t, 2), 3);
    let once = stabilize(&t, 6);
    assert_eq!(twice.dirac(), once.dirac());
    assert_eq!(twice.grading(), once.grading());
    assert_eq!(twice.system().dim(), once.system().dim());
    for b in twice.system().basis() {
        assert!(once.system().residual(b) < 1e-12);
    }
}

#[test]
fn even_even_pauli_example() {
    let t = pauli_even();
    let p = external_product(&t, &t).unwrap();
    assert_eq!(p.parity_case(), ParityCase::EvenEven);
    let d = p.result().dirac();
    let sq = d * d;
    assert!(sq.max_abs_diff(&ComplexMatrix::identity(4).scale_real(2.0)) < 1e-14);
    let ev = hermitian_eigenvalues(d).unwrap();
    let r2 = 2f64.sqrt();
    for (e, want) in ev.iter().zip([-r2, -r2, r2, r2]) {
        assert!((e - want).abs() < 1e-12);
    }
    let [_, _, z] = pauli::<f64>();
    assert_eq!(p.result().grading().unwrap(), &kron(&z, &z));
    assert!(p.result().grading_residual() < 1e-12);
}

#[test]
fn odd_odd_one_point_example() {
    let t = one_point();
    let p = external_product(&t, &t).unwrap();
    assert_eq!(p.parity_case(), ParityCase::OddOdd);
    let want = ComplexMatrix::from_rows(&[
        vec![Complex::new(0.0, 0.0), Complex::new(1.0, 1.0)],
        vec![Complex::new(1.0, -1.0), Complex::new(0.0, 0.0)],
    ])
    .unwrap();
    assert!(p.result().dirac().max_abs_diff(&want) < 1e-15);
    let ev = hermitian_eigenvalues(p.result().dirac()).unwrap();
    assert!((ev[0] + 2f64.sqrt()).abs() < 1e-12 && (ev[1] - 2f64.sqrt()).abs() < 1e-12);
    assert_eq!(p.result().parity(), Parity::Even);
}

#[test]
fn zero_second_dirac_reduces_to_first() {
    let mut rng = rng_from_seed(83);
    for (p1, p2) in [(Parity::Even, Parity::Even), (Parity::Even, Parity::Odd), (Parity::Odd, Parity::Even)] {
        let t1 = sample_triple(2, p1, &mut rng).unwrap();
        let t2 = sample_triple(2, p2, &mut rng).unwrap();
        let zero = LipschitzTriple::new(t2.system().clone(), ComplexMatrix::zeros(2, 2), t2.grading().cloned(), p2).unwrap();
        let p = external_product(&t1, &zero).unwrap();
        let ev = hermitian_eigenvalues(p.result().dirac()).unwrap();
        // odd×even gives D₁⊗γ₂, whose spectrum is ±spec(D₁) (γ₂ has eigenvalues ±1 once each).
        let flip = if p1 == Parity::Odd { -1.0 } else { 1.0 };
        let mut want: Vec<f64> = hermitian_eigenvalues(t1.dirac()).unwrap().into_iter().flat_map(|e| [e, flip * e]).collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10, "{p1:?}x{p2:?}: {ev:?} vs {want:?}");
        }
    }
}

#[test]
fn product_invariants_all_cases() {
    let mut rng = rng_from_seed(84);
    for case in ParityCase::ALL {
        let (p1, p2) = case.factors();
        let t1 = sample_triple(2, p1, &mut rng).unwrap();
        let t2 = sample_triple(if p2 == Parity::Even { 4 } else { 3 }, p2, &mut rng).unwrap();
        let p = external_product(&t1, &t2).unwrap();
        let n = t1.hilbert_dim() * t2.hilbert_dim();
        let want_dim = if case == ParityCase::OddOdd { 2 * n } else { n };
        assert_eq!(p.result().hilbert_dim(), want_dim);
        assert_eq!(p.result().grading().is_some(), matches!(case, ParityCase::EvenEven | ParityCase::OddOdd));
        assert!(p.result().grading_residual() < 1e-10, "{case}");
        assert!(p.result().dirac().hermitian_residual() < 1e-12);
        if case == ParityCase::EvenEven {
            let d = p.result().dirac();
            let sq = &kron(&(t1.dirac() * t1.dirac()), &ComplexMatrix::identity(4))
                + &kron(&ComplexMatrix::identity(2), &(t2.dirac() * t2.dirac()));
            assert!((d * d).max_abs_diff(&sq) < 1e-10);
        }
    }
}

#[test]
fn inequality_and_recovery_all_cases() {
    let mut rng = rng_from_seed(85);
    for case in ParityCase::ALL {
        let (p1, p2) = case.factors();
        let t1 = sample_triple(2, p1, &mut rng).unwrap();
        let t2 = sample_triple(2, p2, &mut rng).unwrap();
        let p = external_product(&t1, &t2).unwrap();
        for s in 1..=3 {
            let rep = check_product_inequality(&p, s, 200, 9);
            assert!(rep.passes(1e-9), "{case} s={s}: {rep:?}");
            assert!(rep.min_ratio >= 1.0 - 1e-9);
        }
    }
}

#[test]
fn inequality_trivial_examples() {
    let mut rng = rng_from_seed(86);
    let t1 = sample_triple(2, Parity::Odd, &mut rng).unwrap();
    let t2 = sample_triple(2, Parity::Even, &mut rng).unwrap();
    let p = external_product(&t1, &t2).unwrap();
    let sys = p.tensor_system();
    let unit = sys.unit(2);
    let v = p.derivations(2, unit.realization());
    assert!(v.left.max_abs() < 1e-13 && v.right.max_abs() < 1e-13 && v.product.max_abs() < 1e-13);
    let x = t1.system().random_element(1, &mut rng);
    let coeffs = elementary(x.coeffs(), t2.system().unit_coords());
    let z = sys.amplify(1, coeffs).unwrap();
    let v = p.derivations(1, z.realization());
    assert!(operator_norm(&v.right) < 1e-12);
    assert!(operator_norm(&v.left) <= operator_norm(&v.product) + 1e-12);
}

#[test]
fn factorization_examples() {
    let mut rng = rng_from_seed(87);
    for case in ParityCase::ALL {
        let (p1, p2) = case.factors();
        let t1 = sample_triple(2, p1, &mut rng).unwrap();
        let t2 = sample_triple(2, p2, &mut rng).unwrap();
        let p = external_product(&t1, &t2).unwrap();
        let sys = p.tensor_system();
        let v = random_complex::<f64>(&mut rng, 2, 2);
        let (l, r, m) = product_seminorm_factorization(&p, &sys.scalar(&v)).unwrap();
        assert!(l < 1e-12 && r < 1e-12 && m < 1e-12);
        let x = t1.system().random_element(1, &mut rng);
        let y = t2.system().random_element(1, &mut rng);
        let z = sys.amplify(1, elementary(x.coeffs(), y.coeffs())).unwrap();
        let (l, r, m) = product_seminorm_factorization(&p, &z).unwrap();
        assert!(l <= t1.seminorm().eval_element(&x).unwrap() * y.norm() + 1e-9);
        assert!(l <= m + 1e-9 && r <= m + 1e-9);
        for s in 1..=3 {
            let z = sys.random_element(s, &mut rng);
            let (l, r, m) = product_seminorm_factorization(&p, &z).unwrap();
            assert!(l <= m + 1e-9 && r <= m + 1e-9, "{case} s={s}");
        }
    }
}

#[test]
fn factorization_rejects_foreign_elements() {
    let mut rng = rng_from_seed(88);
    let t = sample_triple(2, Parity::Odd, &mut rng).unwrap();
    let p = external_product(&t, &t).unwrap();
    let z = t.system().random_element(1, &mut rng);
    assert!(matches!(product_seminorm_factorization(&p, &z), Err(QmsError::DimensionMismatch(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn prop_products_are_valid_triples(seed in any::<u64>(), c in 0usize..4, s in 1usize..3) {
        let mut rng = rng_from_seed(seed);
        let case = ParityCase::ALL[c];
        let (p1, p2) = case.factors();
        let t1 = sample_triple(2, p1, &mut rng).unwrap();
        let t2 = sample_triple(2, p2, &mut rng).unwrap();
        let p = external_product(&t1, &t2).unwrap();
        prop_assert!(p.result().grading_residual() < 1e-10);
        let rep = check_product_inequality(&p, s, 10, seed);
        prop_assert!(rep.passes(1e-9));
    }
}
