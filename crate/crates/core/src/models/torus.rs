use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ergodic::{clock_and_shift, gcd};
use crate::error::{dim_err, QmsError, Result};
use crate::linalg::random::random_complex;
use crate::linalg::{clifford_generators, kron, operator_norm};
use crate::rng::child_rng;
use crate::{ComplexMatrix, C64};

/// Rational rotation algebra with θ = p/q, realized through its symbol
/// U₁ ↦ z₁·V, U₂ ↦ z₂·U on the torus (z₁, z₂) with values in M_q.
#[derive(Clone, Debug)]
pub struct RationalTorus {
    p: usize,
    q: usize,
    clock: ComplexMatrix,
    shift: ComplexMatrix,
}

impl RationalTorus {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if q == 0 || gcd(p, q) != 1 {
            return Err(QmsError::IrrationalTheta(format!("{p}/{q}")));
        }
        let (clock, shift) = clock_and_shift(q, p as i64);
        Ok(Self { p, q, clock, shift })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Phase ω = e^{2πi p/q} in U₁U₂ = ω·U₂U₁.
    pub fn omega(&self) -> C64 {
        Complex::from_polar(1.0, 2.0 * PI * self.p as f64 / self.q as f64)
    }

    /// Symbol of the monomial U₁^{k₁}U₂^{k₂} at (z₁, z₂): z₁^{k₁} z₂^{k₂} V^{k₁} U^{k₂}.
    pub fn monomial(&self, k: (i32, i32), z: (C64, C64)) -> ComplexMatrix {
        let pw = |a: &ComplexMatrix, e: i32| {
            let base = if e < 0 { a.adjoint() } else { a.clone() };
            (0..e.unsigned_abs()).fold(ComplexMatrix::identity(self.q), |acc, _| &acc * &base)
        };
        (&pw(&self.shift, k.0) * &pw(&self.clock, k.1)).scale(z.0.powi(k.0) * z.1.powi(k.1))
    }

    /// Residual of U₁U₂ = ω·U₂U₁ at a symbol point.
    pub fn relation_residual(&self, z: (C64, C64)) -> f64 {
        let (u1, u2) = (self.monomial((1, 0), z), self.monomial((0, 1), z));
        (&u1 * &u2).max_abs_diff(&(&u2 * &u1).scale(self.omega()))
    }
}

/// Element Σ_k c_k ⊗ U₁^{k₁}U₂^{k₂} of M_s(C(𝕋²_θ)) with s×s coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusPolynomial {
    level: usize,
    coeffs: BTreeMap<(i32, i32), ComplexMatrix>,
}

impl TorusPolynomial {
    pub fn new(level: usize, coeffs: BTreeMap<(i32, i32), ComplexMatrix>) -> Result<Self> {
        if coeffs.values().any(|c| c.rows() != level || c.cols() != level) {
            return dim_err(format!("coefficients must be {level}x{level}"));
        }
        Ok(Self { level, coeffs })
    }

    pub fn zero(level: usize) -> Self {
        Self { level, coeffs: BTreeMap::new() }
    }

    /// c ⊗ U₁^{k₁}U₂^{k₂} added in place.
    pub fn add_term(&mut self, k: (i32, i32), c: &ComplexMatrix) {
        assert_eq!(c.rows(), self.level, "coefficient size");
        self.coeffs.entry(k).and_modify(|e| *e += c).or_insert_with(|| c.clone());
    }

    pub fn monomial(level: usize, k: (i32, i32)) -> Self {
        let mut x = Self::zero(level);
        x.add_term(k, &ComplexMatrix::identity(level));
        x
    }

    /// Random polynomial with |k|_∞ ≤ degree and Gaussian coefficients.
    pub fn random(level: usize, degree: i32, rng: &mut (impl Rng + ?Sized)) -> Self {
        let mut x = Self::zero(level);
        for a in -degree..=degree {
            for b in -degree..=degree {
                x.add_term((a, b), &random_complex::<f64>(rng, level, level));
            }
        }
        x
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn coeffs(&self) -> &BTreeMap<(i32, i32), ComplexMatrix> {
        &self.coeffs
    }

    /// Coefficientwise map c_k ↦ f(k)·c_k.
    pub fn scale_by(&self, f: impl Fn((i32, i32)) -> C64) -> Self {
        Self { level: self.level, coeffs: self.coeffs.iter().map(|(k, c)| (*k, c.scale(f(*k)))).collect() }
    }

    /// ∂_j(c_k ⊗ U^k) = i·k_j·c_k ⊗ U^k.
    pub fn derivative(&self, j: usize) -> Self {
        assert!(j < 2, "two derivations");
        self.scale_by(|k| Complex::new(0.0, if j == 0 { k.0 } else { k.1 } as f64))
    }

    /// Gauge action α_λ: c_k ↦ λ₁^{k₁}λ₂^{k₂}·c_k.
    pub fn act(&self, lambda: (C64, C64)) -> Self {
        self.scale_by(|k| lambda.0.powi(k.0) * lambda.1.powi(k.1))
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.add_term(*k, &-c);
        }
        out
    }

    /// Adjoint with the normal-ordering phase: (c ⊗ U^k)* = ω^{−k₁k₂}·c* ⊗ U^{−k}.
    pub fn adjoint(&self, torus: &RationalTorus) -> Self {
        let omega = torus.omega();
        let mut out = Self::zero(self.level);
        for (k, c) in &self.coeffs {
            out.add_term((-k.0, -k.1), &c.adjoint().scale(omega.powi(-k.0 * k.1)));
        }
        out
    }

    /// Matrix symbol Σ_k c_k ⊗ z^k V^{k₁}U^{k₂} in M_s(M_q).
    pub fn symbol(&self, torus: &RationalTorus, z: (C64, C64)) -> ComplexMatrix {
        let n = self.level * torus.q();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, c) in &self.coeffs {
            out += &kron(c, &torus.monomial(*k, z));
        }
        out
    }

    /// Σ_k |k|·‖c_k‖, the Lipschitz constant of the symbol norm in (t₁, t₂).
    pub fn symbol_lipschitz(&self) -> f64 {
        self.coeffs.iter().map(|(k, c)| ((k.0 * k.0 + k.1 * k.1) as f64).sqrt() * operator_norm(c)).sum()
    }
}

/// Grid maximum of a symbol norm with its certified additive error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridNorm {
    /// Maximum over the G×G grid; a lower bound on the norm.
    pub value: f64,
    /// The norm lies in [value, value + error].
    pub error: f64,
    pub grid: usize,
}

impl GridNorm {
    pub fn upper(&self) -> f64 {
        self.value + self.error
    }
}

fn grid_point(g: usize, a: usize, b: usize) -> (C64, C64) {
    let t = |i: usize| Complex::from_polar(1.0, 2.0 * PI * i as f64 / g as f64);
    (t(a), t(b))
}

/// sup_z ‖f(z)‖ on the G×G grid, with error (2π/G)·√2·Lip.
fn grid_max(g: usize, lipschitz: f64, f: impl Fn((C64, C64)) -> ComplexMatrix + Sync) -> GridNorm {
    let value = (0..g * g).into_par_iter().map(|i| operator_norm(&f(grid_point(g, i / g, i % g)))).reduce(|| 0.0, f64::max);
    GridNorm { value, error: 2.0 * PI / g as f64 * 2f64.sqrt() * lipschitz, grid: g }
}

/// C*-norm of a torus polynomial through its symbol.
pub fn torus_norm(torus: &RationalTorus, x: &TorusPolynomial, grid: usize) -> GridNorm {
    grid_max(grid, x.symbol_lipschitz(), |z| x.symbol(torus, z))
}

/// Dirac seminorm L_s(x) = ‖∂₁(x) ⊗ γ₁ + ∂₂(x) ⊗ γ₂‖ with γ₁, γ₂ the first two
/// Clifford generators, evaluated on a grid of the symbol.
#[derive(Clone, Debug)]
pub struct TorusDiracSeminorm {
    torus: RationalTorus,
    grid: usize,
    gammas: [ComplexMatrix; 2],
}

impl TorusDiracSeminorm {
    pub fn new(torus: RationalTorus, grid: usize) -> Self {
        let g = clifford_generators::<f64>(1);
        Self { torus, grid: grid.max(1), gammas: [g[0].clone(), g[1].clone()] }
    }

    pub fn torus(&self) -> &RationalTorus {
        &self.torus
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn with_grid(&self, grid: usize) -> Self {
        Self { grid: grid.max(1), ..self.clone() }
    }

    /// Symbol of Σ_j ∂_j(x) ⊗ γ_j at z.
    pub fn dirac_symbol(&self, x: &TorusPolynomial, z: (C64, C64)) -> ComplexMatrix {
        let mut out = kron(&x.derivative(0).symbol(&self.torus, z), &self.gammas[0]);
        out += &kron(&x.derivative(1).symbol(&self.torus, z), &self.gammas[1]);
        out
    }

    /// Grid value with error bound. The symbol of d(x) has coefficients c_k ⊗ (ik·γ),
    /// of norm |k|·‖c_k‖, so its Lipschitz constant is Σ_k |k|²·‖c_k‖.
    pub fn eval(&self, x: &TorusPolynomial) -> GridNorm {
        let lip = x.coeffs().iter().map(|(k, c)| (k.0 * k.0 + k.1 * k.1) as f64 * operator_norm(c)).sum();
        grid_max(self.grid, lip, |z| self.dirac_symbol(x, z))
    }

    /// ‖∂_j(x)‖ on the grid.
    pub fn component(&self, x: &TorusPolynomial, j: usize) -> GridNorm {
        torus_norm(&self.torus, &x.derivative(j), self.grid)
    }
}

/// ℓ(λ) = √(t₁² + t₂²) for λ = (e^{it₁}, e^{it₂}), t_j ∈ (−π, π].
pub fn torus_length(t: (f64, f64)) -> f64 {
    (t.0 * t.0 + t.1 * t.1).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionDiracReport {
    pub level: usize,
    pub cases: usize,
    /// Cases with ‖α_λ(x) − x‖ > √2·ℓ(λ)·(L + error).
    pub violations: usize,
    /// Cases with ‖∂_j(x)‖ > L + error.
    pub component_violations: usize,
    /// Largest ‖α_λ(x) − x‖/(√2·ℓ(λ)·L) seen.
    pub max_ratio: f64,
    /// Largest ‖∂_j(x)‖/L seen.
    pub max_component_ratio: f64,
}

impl ActionDiracReport {
    pub fn passes(&self) -> bool {
        self.violations == 0 && self.component_violations == 0
    }
}

/// Checks ‖(α_λ)_s(x) − x‖ ≤ √2·ℓ(λ)·L_s(x) and ‖∂_j(x)‖ ≤ L_s(x) on random
/// polynomials of the given degree and random λ. Grid values are lower bounds, so
/// each right side is taken at its certified upper end.
pub fn check_action_vs_dirac(
    dirac: &TorusDiracSeminorm,
    s: usize,
    degree: i32,
    trials: usize,
    seed: u64,
) -> ActionDiracReport {
    let rows: Vec<(bool, bool, f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = child_rng(seed, t as u64);
            let x = TorusPolynomial::random(s, degree, &mut rng);
            let ts = (rng.random_range(-PI..PI), rng.random_range(-PI..PI));
            let lambda = (Complex::from_polar(1.0, ts.0), Complex::from_polar(1.0, ts.1));
            let l = dirac.eval(&x);
            let lhs = torus_norm(&dirac.torus, &x.act(lambda).sub(&x), dirac.grid).value;
            let rhs = 2f64.sqrt() * torus_length(ts) * l.upper();
            let comps = [dirac.component(&x, 0).value, dirac.component(&x, 1).value];
            let comp_max = comps[0].max(comps[1]);
            let tol = 1e-9 * (1.0 + rhs);
            let ratio = if l.value > 0.0 { lhs / (2f64.sqrt() * torus_length(ts) * l.value) } else { 0.0 };
            let comp_ratio = if l.value > 0.0 { comp_max / l.value } else { 0.0 };
            (lhs > rhs + tol, comp_max > l.upper() + 1e-9 * (1.0 + l.upper()), ratio, comp_ratio)
        })
        .collect();
    ActionDiracReport {
        level: s,
        cases: trials,
        violations: rows.iter().filter(|r| r.0).count(),
        component_violations: rows.iter().filter(|r| r.1).count(),
        max_ratio: rows.iter().map(|r| r.2).fold(0.0, f64::max),
        max_component_ratio: rows.iter().map(|r| r.3).fold(0.0, f64::max),
    }
}
