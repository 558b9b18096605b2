use std::f64::consts::PI;

use num_complex::Complex;
use rand::Rng;

use super::*;
use crate::linalg::operator_norm;
use crate::metrics::{
    approximation_defect, certify_finite_diameter_via_norm, finite_diameter_constant, sup_report,
    tensor_product_certification, AuxNorm, FactorData, SolverOptions,
};
use crate::rng::rng_from_seed;
use crate::seminorms::SeminormFamily;
use crate::{ComplexMatrix, C64};

fn point_mass(model: &GroupActionModel) -> Vec<f64> {
    let mut w = vec![0.0; model.order()];
    w[0] = model.order() as f64;
    w
}

fn power(a: &ComplexMatrix, k: usize) -> ComplexMatrix {
    (0..k).fold(ComplexMatrix::identity(a.rows()), |acc, _| &acc * a)
}

fn mix(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect()
}

#[test]
fn weyl_invariants() {
    for q in 2..=5 {
        for p in 1..q {
            let m = GroupActionModel::new(q, p).unwrap();
            assert!(m.commutation_residual() < 1e-12, "q={q} p={p}");
            assert!(m.action_residual() < 1e-12, "q={q} p={p}");
            assert!(m.length_axioms_hold(), "q={q} p={p}");
            for g in 0..m.order() {
                let w = m.weyl(g);
                assert!((&w.adjoint() * w).max_abs_diff(&ComplexMatrix::identity(q)) < 1e-12);
            }
        }
    }
    assert!(GroupActionModel::new(1, 0).is_err());
    assert!(GroupActionModel::new(3, 3).is_err());
}

#[test]
fn ergodic_iff_coprime() {
    for q in 2..=6 {
        for p in 1..q {
            let dim = GroupActionModel::new(q, p).unwrap().fixed_point_dim();
            assert_eq!(dim == 1, is_coprime(p, q), "q={q} p={p} dim={dim}");
        }
    }
    // ω = −1: U and V generate M₂ ⊕ M₂, whose commutant is two-dimensional.
    assert_eq!(GroupActionModel::new(4, 2).unwrap().fixed_point_dim(), 2);
}

#[test]
fn clock_seminorm_by_exhaustion() {
    // α_(m,n)(U) = ω^m·U, so 𝕃(U) = max_g |ω^m − 1|/ℓ(g).
    for (q, p) in [(3, 1), (4, 1), (5, 2)] {
        let m = GroupActionModel::new(q, p).unwrap();
        let omega = m.omega();
        let mut expected: f64 = 0.0;
        for mm in 0..q {
            for n in 0..q {
                let g = m.index(mm, n);
                if g != 0 {
                    expected = expected.max((omega.powi(mm as i32) - 1.0).norm() / m.length(g));
                }
            }
        }
        let got = m.ergodic_seminorm().eval(1, m.clock()).unwrap();
        assert!((got - expected).abs() < 1e-12, "q={q}: {got} vs {expected}");
    }
}

#[test]
fn monomials_are_spectral() {
    let (q, p) = (5, 2);
    let m = GroupActionModel::new(q, p).unwrap();
    for j in 0..q {
        for k in 0..q {
            let mono = &power(m.clock(), j) * &power(m.shift(), k);
            // α_(a,b)(U^j V^k) = ω^{aj − bk}·U^j V^k picks the character (pj, −pk).
            let chi = m.index(p * j % q, (q - p * k % q) % q);
            for c in 0..m.order() {
                let proj = m.spectral_projection(c, &mono);
                let target = if c == chi { mono.clone() } else { ComplexMatrix::zeros(q, q) };
                assert!(proj.max_abs_diff(&target) < 1e-12, "j={j} k={k} c={c}");
            }
        }
    }
    let (complete, idem) = m.projection_residuals(4, 9);
    assert!(complete < 1e-12 && idem < 1e-12);
}

#[test]
fn extreme_weights() {
    let m = GroupActionModel::new(3, 1).unwrap();
    let opts = SolverOptions::quick();
    let id = m.averaging_approximation(&point_mass(&m)).unwrap();
    assert_eq!(id.epsilon(), Some(0.0));
    let d = approximation_defect(&id, &m.ergodic_seminorm(), 1, &opts, 1).unwrap();
    assert!(d[0].value < 1e-12);

    let uniform = vec![1.0; m.order()];
    assert!((m.averaging_bound(&uniform) - m.eta()).abs() < 1e-12);
    let e = m.averaging_approximation(&uniform).unwrap();
    let mut rng = rng_from_seed(4);
    let a = m.system().random_element(1, &mut rng).realization().clone();
    let tr = a.trace() / 3.0;
    let coords = e.apply_phi(1, &m.system().coords(&a));
    assert!(m.system().coords(&ComplexMatrix::identity(3).scale(tr)).iter().zip(&coords).all(|(u, v)| (u - v).norm() < 1e-12));
    assert!(m.expectation(&a).max_abs_diff(&ComplexMatrix::identity(3).scale(tr)) < 1e-12);

    assert!(m.averaging_approximation(&[1.0; 3]).is_err());
    assert!(m.averaging_approximation(&[2.0; 9]).is_err());
}

#[test]
fn fejer_sequence_endpoints() {
    for q in [3, 5, 7] {
        let m = GroupActionModel::new(q, 1).unwrap();
        let seq = m.standard_weight_sequence();
        assert!(seq[0].iter().all(|w| (w - 1.0).abs() < 1e-12));
        let last = seq.last().unwrap();
        assert!(last.iter().zip(point_mass(&m)).all(|(a, b)| (a - b).abs() < 1e-9), "q={q}");
        let bounds: Vec<f64> = seq.iter().map(|w| m.averaging_bound(w)).collect();
        assert!(bounds.windows(2).all(|b| b[1] < b[0]), "{bounds:?}");
    }
}

#[test]
fn fejer_defects_within_bounds() {
    let m = GroupActionModel::new(5, 2).unwrap();
    let family = m.ergodic_seminorm();
    let opts = SolverOptions::quick();
    let mut measured = Vec::new();
    for (i, w) in m.standard_weight_sequence().iter().enumerate() {
        let pair = m.averaging_approximation(w).unwrap();
        let reps = approximation_defect(&pair, &family, 1, &opts, 20 + i as u64).unwrap();
        let v = sup_report(&reps).unwrap().value;
        assert!(v <= pair.epsilon().unwrap() + 1e-9, "order {i}: {v} > {:?}", pair.epsilon());
        measured.push(v);
    }
    assert!(measured.windows(2).all(|v| v[1] <= v[0] + 1e-9), "{measured:?}");
    assert!(*measured.last().unwrap() < 1e-12);
}

#[test]
fn averaging_bound_on_random_elements() {
    for (q, p) in [(3, 1), (4, 1), (5, 3)] {
        let m = GroupActionModel::new(q, p).unwrap();
        let uniform = vec![1.0; m.order()];
        for w in [uniform.clone(), m.fejer_weights(1), mix(&uniform, &point_mass(&m), 0.3)] {
            for s in 1..=2 {
                let check = m.check_averaging_bound(&w, s, 40, 5).unwrap();
                assert_eq!(check.violations, 0, "{check:?}");
                assert!(check.max_ratio <= check.bound + 1e-9);
            }
        }
    }
}

#[test]
fn diameter_bounded_by_eta() {
    let m = GroupActionModel::new(3, 1).unwrap();
    let reps = finite_diameter_constant(&m.ergodic_seminorm(), &m.system(), 2, &SolverOptions::quick(), 6).unwrap();
    for r in &reps {
        assert!(!r.infinite && r.value <= m.eta() + 1e-9, "{r:?} vs η = {}", m.eta());
        assert!(r.value > 0.0);
    }
}

#[test]
fn averaging_certificate() {
    let m = GroupActionModel::new(3, 2).unwrap();
    let family = m.ergodic_seminorm();
    let opts = SolverOptions::quick();
    // ψ ≡ 1: Φ = E is scalar valued, so the constant is η alone.
    let e = m.averaging_approximation(&[1.0; 9]).unwrap();
    let cert = certify_finite_diameter_via_norm(&e, &family, AuxNorm::Quotient, 0.0, &opts, 3).unwrap();
    assert!((cert.constant - m.eta()).abs() < 1e-12);
    // Otherwise ‖[Φ(x)]‖ ≤ ‖Φ(x − E x)‖ ≤ η·𝕃(x).
    let w = mix(&[1.0; 9], &point_mass(&m), 0.5);
    let pair = m.averaging_approximation(&w).unwrap();
    let cert = certify_finite_diameter_via_norm(&pair, &family, AuxNorm::Quotient, m.eta(), &opts, 3).unwrap();
    assert!(cert.measured_d <= m.eta() + 1e-9);
    assert!((cert.constant - (m.averaging_bound(&w) + m.eta())).abs() < 1e-12);
}

fn torus(p: usize, q: usize) -> RationalTorus {
    RationalTorus::new(p, q).unwrap()
}

fn unit_point(rng: &mut impl Rng) -> (C64, C64) {
    (Complex::from_polar(1.0, rng.random_range(-PI..PI)), Complex::from_polar(1.0, rng.random_range(-PI..PI)))
}

#[test]
fn torus_relation_and_validation() {
    let t = torus(2, 5);
    let mut rng = rng_from_seed(1);
    for _ in 0..5 {
        assert!(t.relation_residual(unit_point(&mut rng)) < 1e-12);
    }
    assert!(RationalTorus::new(2, 4).is_err());
    assert!(RationalTorus::new(1, 0).is_err());
}

#[test]
fn torus_dirac_examples() {
    for (p, q) in [(1, 2), (1, 3), (2, 5)] {
        let d = TorusDiracSeminorm::new(torus(p, q), 16);
        assert_eq!(d.eval(&TorusPolynomial::monomial(1, (0, 0))).upper(), 0.0);
        let u1 = d.eval(&TorusPolynomial::monomial(1, (1, 0)));
        assert!((u1.value - 1.0).abs() < 1e-12);
        // |d(U₁ + U₂)(z)|² = 2 + 2|Im μ| with μ ranging over the unit circle, so the sup is 2.
        let mut x = TorusPolynomial::monomial(1, (1, 0));
        x.add_term((0, 1), &ComplexMatrix::identity(1));
        let g = d.with_grid(64).eval(&x);
        assert!(g.value <= 2.0 + 1e-12 && g.upper() >= 2.0 && g.value > 1.99, "p/q = {p}/{q}: {g:?}");
    }
}

#[test]
fn torus_adjoint_and_action_match_symbol() {
    let t = torus(2, 5);
    let mut rng = rng_from_seed(2);
    let x = TorusPolynomial::random(2, 2, &mut rng);
    let lambda = unit_point(&mut rng);
    for _ in 0..5 {
        let z = unit_point(&mut rng);
        assert!(x.adjoint(&t).symbol(&t, z).max_abs_diff(&x.symbol(&t, z).adjoint()) < 1e-10);
        let shifted = (z.0 * lambda.0, z.1 * lambda.1);
        assert!(x.act(lambda).symbol(&t, z).max_abs_diff(&x.symbol(&t, shifted)) < 1e-10);
    }
    let back = x.adjoint(&t).adjoint(&t).sub(&x);
    assert!(back.coeffs().values().all(|c| operator_norm(c) < 1e-12));
}

#[test]
fn torus_grid_refinement_is_monotone() {
    let t = torus(1, 3);
    let mut rng = rng_from_seed(3);
    let x = TorusPolynomial::random(1, 2, &mut rng);
    let d = TorusDiracSeminorm::new(t, 4);
    let grids: Vec<GridNorm> = [4, 8, 16, 32, 64].iter().map(|&g| d.with_grid(g).eval(&x)).collect();
    for w in grids.windows(2) {
        assert!(w[1].value >= w[0].value - 1e-12);
        assert!(w[1].error < w[0].error);
    }
    let finest = grids.last().unwrap().value;
    assert!(grids.iter().all(|g| g.upper() >= finest - 1e-12));
}

#[test]
fn torus_action_bounded_by_dirac() {
    let d = TorusDiracSeminorm::new(torus(1, 3), 24);
    for s in 1..=2 {
        let report = check_action_vs_dirac(&d, s, 1, 50, 40 + s as u64);
        assert!(report.passes(), "{report:?}");
        assert!(report.max_ratio > 0.0 && report.max_component_ratio <= 1.0 + 1e-6);
    }
}

#[test]
fn weyl_tensor_certification() {
    let factor = |q: usize, p: usize, w: fn(&GroupActionModel) -> Vec<f64>| {
        let m = GroupActionModel::new(q, p).unwrap();
        FactorData {
            system: m.system(),
            family: m.ergodic_seminorm(),
            approx: m.averaging_approximation(&w(&m)).unwrap(),
            diameter_constant: m.eta(),
        }
    };
    let x = factor(2, 1, |m| vec![1.0; m.order()]);
    let y = factor(3, 1, |m| mix(&vec![1.0; m.order()], &point_mass(m), 0.5));
    let mm = SeminormFamily::max(&SeminormFamily::tensor_left(&x.family, 3), &SeminormFamily::tensor_right(2, &y.family))
        .unwrap();
    let cert = tensor_product_certification(&x, &y, &mm, 1.0, 1, &SolverOptions::quick(), 8).unwrap();
    assert!(cert.hypothesis_ratio <= 1.0 + 1e-12);
    assert!(cert.passes(), "{cert:?}");
}
