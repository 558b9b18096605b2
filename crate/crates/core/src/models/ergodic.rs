use std::f64::consts::PI;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QmsError, Result};
use crate::linalg::{block_sandwich, null_space, operator_norm, Matrix};
use crate::metrics::{ApproxFlags, ApproxPair};
use crate::opsys::OperatorSystem;
use crate::rng::child_rng;
use crate::seminorms::SeminormFamily;
use crate::tolerances::TOL;
use crate::{ComplexMatrix, C64};

pub(crate) fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Representative of k mod q in (−q/2, q/2].
pub(crate) fn centred(k: i64, q: usize) -> i64 {
    let q = q as i64;
    let r = k.rem_euclid(q);
    if 2 * r > q {
        r - q
    } else {
        r
    }
}

/// Clock U = diag(ω^j) and shift V e_j = e_{j−1}, so VU = ω·UV.
pub fn clock_and_shift(q: usize, p: i64) -> (ComplexMatrix, ComplexMatrix) {
    let omega = Complex::from_polar(1.0, 2.0 * PI * p as f64 / q as f64);
    let u = ComplexMatrix::from_diag(&(0..q).map(|j| omega.powi(j as i32)).collect::<Vec<_>>());
    let v = ComplexMatrix::from_fn(q, q, |i, j| Complex::new(if i == (j + q - 1) % q { 1.0 } else { 0.0 }, 0.0));
    (u, v)
}

fn power(a: &ComplexMatrix, k: usize) -> ComplexMatrix {
    (0..k).fold(ComplexMatrix::identity(a.rows()), |acc, _| &acc * a)
}

/// ℤ_q × ℤ_q acting on M_q(ℂ) by conjugation with Weyl unitaries W(m, n) = V^m U^n.
/// Group elements are indexed m·q + n; index 0 is the identity.
#[derive(Clone, Debug)]
pub struct GroupActionModel {
    q: usize,
    p: usize,
    clock: ComplexMatrix,
    shift: ComplexMatrix,
    unitaries: Vec<ComplexMatrix>,
    lengths: Vec<f64>,
}

impl GroupActionModel {
    pub fn new(q: usize, p: usize) -> Result<Self> {
        if q < 2 || p >= q {
            return Err(QmsError::InvalidArgument(format!("need q ≥ 2 and 0 ≤ p < q, got q = {q}, p = {p}")));
        }
        let (clock, shift) = clock_and_shift(q, p as i64);
        let mut unitaries = Vec::with_capacity(q * q);
        let mut lengths = Vec::with_capacity(q * q);
        for m in 0..q {
            let vm = power(&shift, m);
            for n in 0..q {
                unitaries.push(&vm * &power(&clock, n));
                let (a, b) = (centred(m as i64, q) as f64, centred(n as i64, q) as f64);
                lengths.push(2.0 * PI / q as f64 * (a * a + b * b).sqrt());
            }
        }
        Ok(Self { q, p, clock, shift, unitaries, lengths })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn order(&self) -> usize {
        self.q * self.q
    }

    pub fn clock(&self) -> &ComplexMatrix {
        &self.clock
    }

    pub fn shift(&self) -> &ComplexMatrix {
        &self.shift
    }

    pub fn omega(&self) -> C64 {
        Complex::from_polar(1.0, 2.0 * PI * self.p as f64 / self.q as f64)
    }

    pub fn index(&self, m: usize, n: usize) -> usize {
        (m % self.q) * self.q + n % self.q
    }

    pub fn weyl(&self, g: usize) -> &ComplexMatrix {
        &self.unitaries[g]
    }

    pub fn length(&self, g: usize) -> f64 {
        self.lengths[g]
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    fn compose(&self, g: usize, h: usize) -> usize {
        let q = self.q;
        self.index(g / q + h / q, g % q + h % q)
    }

    fn inverse(&self, g: usize) -> usize {
        let q = self.q;
        self.index(q - g / q, q - g % q)
    }

    pub fn system(&self) -> OperatorSystem {
        OperatorSystem::full_matrix_algebra(self.q)
    }

    /// α_g(a) = W a W*.
    pub fn act(&self, g: usize, a: &ComplexMatrix) -> ComplexMatrix {
        let w = &self.unitaries[g];
        &(w * a) * &w.adjoint()
    }

    /// (α_g)_s on M_s(M_q).
    pub fn act_amplified(&self, g: usize, x: &ComplexMatrix, s: usize) -> ComplexMatrix {
        let w = &self.unitaries[g];
        block_sandwich(w, x, &w.adjoint(), s)
    }

    /// ‖VU − ω·UV‖_max.
    pub fn commutation_residual(&self) -> f64 {
        (&self.shift * &self.clock).max_abs_diff(&(&self.clock * &self.shift).scale(self.omega()))
    }

    /// max over g, h and the matrix units of ‖α_g(α_h(a)) − α_{g+h}(a)‖_max.
    pub fn action_residual(&self) -> f64 {
        let q = self.q;
        let n = self.order();
        (0..n * n)
            .into_par_iter()
            .map(|gh| {
                let (g, h) = (gh / n, gh % n);
                let gh = self.compose(g, h);
                let mut worst: f64 = 0.0;
                for i in 0..q {
                    for j in 0..q {
                        let a = ComplexMatrix::unit(q, q, i, j);
                        worst = worst.max(self.act(g, &self.act(h, &a)).max_abs_diff(&self.act(gh, &a)));
                    }
                }
                worst
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Exhaustive check of ℓ(g) = 0 ⇔ g = e, ℓ(g⁻¹) = ℓ(g) and ℓ(gh) ≤ ℓ(g) + ℓ(h).
    pub fn length_axioms_hold(&self) -> bool {
        let n = self.order();
        let l = &self.lengths;
        (0..n).all(|g| (l[g] == 0.0) == (g == 0) && (l[self.inverse(g)] - l[g]).abs() <= 1e-12)
            && (0..n).all(|g| (0..n).all(|h| l[self.compose(g, h)] <= l[g] + l[h] + 1e-12))
    }

    /// Dimension of the fixed-point algebra, from the null space of a ↦ (α_g(a) − a)_g
    /// over the generators (1, 0) and (0, 1).
    pub fn fixed_point_dim(&self) -> usize {
        let q = self.q;
        let gens = [self.index(1, 0), self.index(0, 1)];
        let cols: Vec<Vec<C64>> = (0..q * q)
            .map(|c| {
                let a = ComplexMatrix::unit(q, q, c / q, c % q);
                gens.iter().flat_map(|&g| (&self.act(g, &a) - &a).into_data()).collect()
            })
            .collect();
        let map = Matrix::from_fn(2 * q * q, q * q, |r, c| cols[c][r]);
        null_space(&map, TOL.rank_cutoff).len()
    }

    /// η(ℓ): the average length over the group.
    pub fn eta(&self) -> f64 {
        self.lengths.iter().sum::<f64>() / self.order() as f64
    }

    /// 𝕃_s(a) = max_{g ≠ e} ‖(α_g)_s(a) − a‖/ℓ(g).
    pub fn ergodic_seminorm(&self) -> SeminormFamily {
        let gens: Vec<(ComplexMatrix, f64)> =
            (1..self.order()).map(|g| (self.unitaries[g].clone(), self.lengths[g])).collect();
        SeminormFamily::action(&gens).expect("nonidentity elements have positive length")
    }

    /// γ_{(a,b)}(m, n) = exp(2πi(a·m + b·n)/q); characters are indexed like elements.
    pub fn character(&self, chi: usize, g: usize) -> C64 {
        let q = self.q;
        let phase = ((chi / q) * (g / q) + (chi % q) * (g % q)) % q;
        Complex::from_polar(1.0, 2.0 * PI * phase as f64 / q as f64)
    }

    /// P_γ(a) = (1/|G|)·Σ_g conj(γ(g))·α_g(a).
    pub fn spectral_projection(&self, chi: usize, a: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(a.rows(), a.cols());
        for g in 0..self.order() {
            out.axpy(self.character(chi, g).conj(), &self.act(g, a));
        }
        out.scale_real(1.0 / self.order() as f64)
    }

    /// Conditional expectation E = P_trivial.
    pub fn expectation(&self, a: &ComplexMatrix) -> ComplexMatrix {
        self.spectral_projection(0, a)
    }

    fn check_weight(&self, weight: &[f64]) -> Result<()> {
        if weight.len() != self.order() {
            return Err(QmsError::InvalidWeight(format!("need {} values, got {}", self.order(), weight.len())));
        }
        if weight.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(QmsError::InvalidWeight("weights must be nonnegative and finite".into()));
        }
        let mean = weight.iter().sum::<f64>() / self.order() as f64;
        if (mean - 1.0).abs() > 1e-9 {
            return Err(QmsError::InvalidWeight(format!("weights must have mean 1, got {mean}")));
        }
        Ok(())
    }

    /// Φ_ψ(a) = (1/|G|)·Σ_g ψ(g)·α_g(a), paired with the inclusion and carrying the
    /// defect bound (1/|G|)·Σ_g ψ(g)·ℓ(g).
    pub fn averaging_approximation(&self, weight: &[f64]) -> Result<ApproxPair> {
        self.check_weight(weight)?;
        let n = self.order() as f64;
        let map = |a: &ComplexMatrix| {
            let mut out = ComplexMatrix::zeros(a.rows(), a.cols());
            for (g, w) in weight.iter().enumerate() {
                if *w != 0.0 {
                    out.axpy(Complex::new(w / n, 0.0), &self.act(g, a));
                }
            }
            out
        };
        let flags = ApproxFlags { positive: true, isometric: true, completely_positive: true };
        let pair = ApproxPair::from_map(self.system(), map, flags)?;
        Ok(pair.with_epsilon(self.averaging_bound(weight)))
    }

    /// (1/|G|)·Σ_g ψ(g)·ℓ(g).
    pub fn averaging_bound(&self, weight: &[f64]) -> f64 {
        weight.iter().zip(&self.lengths).map(|(w, l)| w * l).sum::<f64>() / self.order() as f64
    }

    /// ψ_N(m, n) ∝ F_N(m)·F_N(n) with F_N(k) = |Σ_{|j|≤N} e^{2πijk/q}|², mean 1.
    pub fn fejer_weights(&self, order: usize) -> Vec<f64> {
        let q = self.q;
        let kernel: Vec<f64> = (0..q)
            .map(|k| {
                (-(order as i64)..=order as i64)
                    .map(|j| Complex::from_polar(1.0, 2.0 * PI * (j * k as i64) as f64 / q as f64))
                    .sum::<C64>()
                    .norm_sqr()
            })
            .collect();
        // Exact zeros of the kernel come out at roundoff level.
        let peak = kernel.iter().copied().fold(0.0, f64::max);
        let kernel: Vec<f64> = kernel.into_iter().map(|x| if x <= 1e-12 * peak { 0.0 } else { x }).collect();
        let mean = kernel.iter().sum::<f64>() / q as f64;
        let f: Vec<f64> = kernel.iter().map(|x| x / mean).collect();
        (0..self.order()).map(|g| f[g / q] * f[g % q]).collect()
    }

    /// Fejér orders 0, 1, …, ⌊(q−1)/2⌋: from the uniform weight to the point mass at e.
    pub fn standard_weight_sequence(&self) -> Vec<Vec<f64>> {
        (0..=(self.q - 1) / 2).map(|n| self.fejer_weights(n)).collect()
    }

    /// Checks ‖x − (Φ_ψ)_s(x)‖ ≤ ε_ψ·𝕃_s(x) on random elements of M_s(M_q).
    pub fn check_averaging_bound(&self, weight: &[f64], s: usize, trials: usize, seed: u64) -> Result<AveragingCheck> {
        self.check_weight(weight)?;
        let eps = self.averaging_bound(weight);
        let family = self.ergodic_seminorm();
        let sys = self.system();
        let n = self.order() as f64;
        let results: Vec<(f64, f64)> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = child_rng(seed, t as u64);
                let x = sys.random_element(s, &mut rng);
                let r = x.realization();
                let mut avg = ComplexMatrix::zeros(r.rows(), r.cols());
                for (g, w) in weight.iter().enumerate() {
                    if *w != 0.0 {
                        avg.axpy(Complex::new(w / n, 0.0), &self.act_amplified(g, r, s));
                    }
                }
                let lhs = operator_norm(&(r - &avg));
                let l = family.eval_unchecked(s, r);
                (lhs, l)
            })
            .collect();
        let violations = results.iter().filter(|(lhs, l)| *lhs > eps * l + TOL.compare * (1.0 + eps * l)).count();
        let max_ratio = results.iter().map(|(lhs, l)| if *l > 0.0 { lhs / l } else { 0.0 }).fold(0.0, f64::max);
        Ok(AveragingCheck { level: s, cases: trials, bound: eps, max_ratio, violations })
    }

    /// Residual ‖Σ_γ P_γ(a) − a‖ and worst idempotence residual over all characters,
    /// for random a.
    pub fn projection_residuals(&self, trials: usize, seed: u64) -> (f64, f64) {
        let sys = self.system();
        let mut completeness: f64 = 0.0;
        let mut idempotence: f64 = 0.0;
        for t in 0..trials {
            let a = sys.random_element(1, &mut child_rng(seed, t as u64)).realization().clone();
            let mut total = ComplexMatrix::zeros(self.q, self.q);
            for chi in 0..self.order() {
                let pa = self.spectral_projection(chi, &a);
                idempotence = idempotence.max(self.spectral_projection(chi, &pa).max_abs_diff(&pa));
                total += &pa;
            }
            completeness = completeness.max(total.max_abs_diff(&a));
        }
        (completeness, idempotence)
    }
}

/// Outcome of [`GroupActionModel::check_averaging_bound`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragingCheck {
    pub level: usize,
    pub cases: usize,
    /// Analytic defect bound ε_ψ.
    pub bound: f64,
    /// Largest ‖x − Φ_s(x)‖/𝕃_s(x) observed.
    pub max_ratio: f64,
    pub violations: usize,
}

/// gcd(p, q) = 1 makes the action ergodic.
pub fn is_coprime(p: usize, q: usize) -> bool {
    gcd(p, q) == 1
}
