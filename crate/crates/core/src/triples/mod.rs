//! Finite-dimensional Lipschitz triples (𝒜, H, D), optionally graded, with
//! matrix stabilization and the external product in all four parity cases.
//!
//! Hilbert spaces are finite-dimensional, so the compact-resolvent condition is
//! vacuous and every Dirac operator is a Hermitian matrix.

use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::random::{random_complex, random_hermitian};
use crate::linalg::{block_left, block_right, block_sandwich, direct_sum, kron, operator_norm};
use crate::opsys::{AmplifiedElement, OperatorSystem};
use crate::rng::child_rng;
use crate::seminorms::SeminormFamily;
use crate::tolerances::TOL;
use crate::{ComplexMatrix, QmsError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParityCase {
    EvenEven,
    EvenOdd,
    OddEven,
    OddOdd,
}

impl ParityCase {
    pub const ALL: [ParityCase; 4] = [Self::EvenEven, Self::EvenOdd, Self::OddEven, Self::OddOdd];

    pub fn of(first: Parity, second: Parity) -> Self {
        match (first, second) {
            (Parity::Even, Parity::Even) => Self::EvenEven,
            (Parity::Even, Parity::Odd) => Self::EvenOdd,
            (Parity::Odd, Parity::Even) => Self::OddEven,
            (Parity::Odd, Parity::Odd) => Self::OddOdd,
        }
    }

    pub fn factors(self) -> (Parity, Parity) {
        match self {
            Self::EvenEven => (Parity::Even, Parity::Even),
            Self::EvenOdd => (Parity::Even, Parity::Odd),
            Self::OddEven => (Parity::Odd, Parity::Even),
            Self::OddOdd => (Parity::Odd, Parity::Odd),
        }
    }
}

impl std::fmt::Display for ParityCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::EvenEven => "even-even",
            Self::EvenOdd => "even-odd",
            Self::OddEven => "odd-even",
            Self::OddOdd => "odd-odd",
        })
    }
}

#[derive(Clone, Debug)]
pub struct LipschitzTriple {
    system: OperatorSystem,
    dirac: ComplexMatrix,
    grading: Option<ComplexMatrix>,
    parity: Parity,
}

impl LipschitzTriple {
    /// Validates the triple against the declared parity.
    ///
    /// The system must be a unital *-algebra acting on ℂ^d, D Hermitian, and for even
    /// triples γ a Hermitian unitary anticommuting with D and commuting with 𝒜.
    pub fn new(system: OperatorSystem, dirac: ComplexMatrix, grading: Option<ComplexMatrix>, parity: Parity) -> Result<Self> {
        let d = system.ambient_dim();
        if dirac.rows() != d || dirac.cols() != d {
            return Err(QmsError::DimensionMismatch(format!("Dirac operator must be {d}x{d}")));
        }
        let tol = TOL.hermitian * (1.0 + dirac.frobenius_norm());
        let res = dirac.hermitian_residual();
        if res > tol {
            return Err(QmsError::NotHermitian { residual: res });
        }
        match (&grading, parity) {
            (None, Parity::Even) => return Err(QmsError::ParityMismatch("even triple without a grading".into())),
            (Some(_), Parity::Odd) => return Err(QmsError::ParityMismatch("odd triple with a grading".into())),
            _ => {}
        }
        check_algebra(&system)?;
        if let Some(g) = &grading {
            if g.rows() != d || g.cols() != d {
                return Err(QmsError::DimensionMismatch(format!("grading must be {d}x{d}")));
            }
            let square = (&(g * g) - &ComplexMatrix::identity(d)).max_abs();
            let herm = g.hermitian_residual();
            let anti = (&(g * &dirac) + &(&dirac * g)).max_abs();
            let comm = system
                .basis()
                .iter()
                .map(|a| (&(g * a) - &(a * g)).max_abs())
                .fold(0.0, f64::max);
            let worst = square.max(herm).max(anti / (1.0 + dirac.max_abs())).max(comm);
            if worst > TOL.hermitian {
                return Err(QmsError::InvalidTriple(format!(
                    "grading relations fail (γ²−1: {square:.2e}, γD+Dγ: {anti:.2e}, [γ,a]: {comm:.2e})"
                )));
            }
        }
        Ok(Self { system, dirac, grading, parity })
    }

    pub fn odd(system: OperatorSystem, dirac: ComplexMatrix) -> Result<Self> {
        Self::new(system, dirac, None, Parity::Odd)
    }

    pub fn even(system: OperatorSystem, dirac: ComplexMatrix, grading: ComplexMatrix) -> Result<Self> {
        Self::new(system, dirac, Some(grading), Parity::Even)
    }

    pub fn system(&self) -> &OperatorSystem {
        &self.system
    }

    pub fn hilbert_dim(&self) -> usize {
        self.dirac.rows()
    }

    pub fn dirac(&self) -> &ComplexMatrix {
        &self.dirac
    }

    pub fn grading(&self) -> Option<&ComplexMatrix> {
        self.grading.as_ref()
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Commutator seminorm family L_{D^{⊕s}}.
    pub fn seminorm(&self) -> SeminormFamily {
        SeminormFamily::commutator(&self.dirac).expect("validated Hermitian")
    }

    /// Largest violation of the grading relations (zero for odd triples).
    pub fn grading_residual(&self) -> f64 {
        let Some(g) = &self.grading else { return 0.0 };
        let d = self.hilbert_dim();
        let square = (&(g * g) - &ComplexMatrix::identity(d)).max_abs();
        let anti = (&(g * &self.dirac) + &(&self.dirac * g)).max_abs();
        let comm = self.system.basis().iter().map(|a| (&(g * a) - &(a * g)).max_abs()).fold(0.0, f64::max);
        square.max(anti).max(comm)
    }
}

/// Products of basis elements must stay in the span.
fn check_algebra(system: &OperatorSystem) -> Result<()> {
    let basis = system.basis();
    let worst = basis
        .par_iter()
        .map(|a| basis.iter().map(|b| system.residual(&(a * b))).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max);
    if worst > TOL.rank_cutoff {
        return Err(QmsError::InvalidTriple(format!("system is not closed under multiplication (residual {worst:.2e})")));
    }
    Ok(())
}

/// (M_n(𝒜), H^{⊕n}, D^{⊕n}) with grading γ^{⊕n}.
pub fn stabilize(t: &LipschitzTriple, n: usize) -> LipschitzTriple {
    assert!(n >= 1, "stabilization order must be positive");
    let i_n = ComplexMatrix::identity(n);
    LipschitzTriple {
        system: t.system.matrix_amplification(n),
        dirac: kron(&i_n, &t.dirac),
        grading: t.grading.as_ref().map(|g| kron(&i_n, g)),
        parity: t.parity,
    }
}

#[derive(Clone, Debug)]
pub struct ProductTriple {
    factors: (LipschitzTriple, LipschitzTriple),
    case: ParityCase,
    /// 𝒜₁ ⊗ 𝒜₂ acting on H₁ ⊗ H₂; coordinates of product elements live here.
    tensor_system: OperatorSystem,
    result: LipschitzTriple,
}

impl ProductTriple {
    pub fn factors(&self) -> (&LipschitzTriple, &LipschitzTriple) {
        (&self.factors.0, &self.factors.1)
    }

    pub fn parity_case(&self) -> ParityCase {
        self.case
    }

    pub fn tensor_system(&self) -> &OperatorSystem {
        &self.tensor_system
    }

    pub fn result(&self) -> &LipschitzTriple {
        &self.result
    }

    /// Realization of z ∈ M_s(𝒜₁ ⊗ 𝒜₂) on (H₁⊗H₂)^{⊕s}, or on ((H₁⊗H₂)^{⊕2})^{⊕s}
    /// through the diagonal representation in the odd×odd case.
    pub fn represent(&self, s: usize, tensor_realization: &ComplexMatrix) -> ComplexMatrix {
        if self.case != ParityCase::OddOdd {
            return tensor_realization.clone();
        }
        let n = self.tensor_system.ambient_dim();
        let mut out = ComplexMatrix::zeros(2 * s * n, 2 * s * n);
        for i in 0..s {
            for j in 0..s {
                let blk = tensor_realization.block(i * n, j * n, n, n);
                out.set_block(2 * i * n, 2 * j * n, &blk);
                out.set_block((2 * i + 1) * n, (2 * j + 1) * n, &blk);
            }
        }
        out
    }
}

/// External product (𝒜₁ ⊗ 𝒜₂, H, D₁ × D₂).
///
/// even×even: D₁⊗1 + γ₁⊗D₂ graded by γ₁⊗γ₂; even×odd: D₁⊗1 + γ₁⊗D₂;
/// odd×even: D₁⊗γ₂ + 1⊗D₂; odd×odd: on ℂ²⊗H₁⊗H₂ the off-diagonal operator with
/// blocks D₁⊗1 ± i(1⊗D₂), graded by diag(1, −1), algebra acting diagonally.
pub fn external_product(t1: &LipschitzTriple, t2: &LipschitzTriple) -> Result<ProductTriple> {
    let (d1, d2) = (t1.hilbert_dim(), t2.hilbert_dim());
    let (i1, i2) = (ComplexMatrix::identity(d1), ComplexMatrix::identity(d2));
    let case = ParityCase::of(t1.parity, t2.parity);
    let grading_of = |t: &LipschitzTriple, which: &str| {
        t.grading.clone().ok_or_else(|| QmsError::ParityMismatch(format!("{which} factor is even but has no grading")))
    };
    let tensor_system = t1.system.tensor(&t2.system);
    let left = kron(&t1.dirac, &i2);
    let right = kron(&i1, &t2.dirac);
    let (system, dirac, grading, parity) = match case {
        ParityCase::EvenEven => {
            let (g1, g2) = (grading_of(t1, "first")?, grading_of(t2, "second")?);
            let dirac = &left + &kron(&g1, &t2.dirac);
            (tensor_system.clone(), dirac, Some(kron(&g1, &g2)), Parity::Even)
        }
        ParityCase::EvenOdd => {
            let g1 = grading_of(t1, "first")?;
            (tensor_system.clone(), &left + &kron(&g1, &t2.dirac), None, Parity::Odd)
        }
        ParityCase::OddEven => {
            let g2 = grading_of(t2, "second")?;
            (tensor_system.clone(), &kron(&t1.dirac, &g2) + &right, None, Parity::Odd)
        }
        ParityCase::OddOdd => {
            let n = d1 * d2;
            let i = Complex::new(0.0, 1.0);
            let mut dirac = ComplexMatrix::zeros(2 * n, 2 * n);
            dirac.set_block(0, n, &(&left + &right.scale(i)));
            dirac.set_block(n, 0, &(&left - &right.scale(i)));
            let i2n = ComplexMatrix::identity(2);
            let grading = direct_sum(&ComplexMatrix::identity(n), &ComplexMatrix::identity(n).scale_real(-1.0));
            let system = tensor_system.map_basis(|b| kron(&i2n, b))?;
            (system, dirac, Some(grading), Parity::Even)
        }
    };
    let result = LipschitzTriple::new(system, dirac, grading, parity)?;
    Ok(ProductTriple { factors: (t1.clone(), t2.clone()), case, tensor_system, result })
}

/// Outcome of the randomized check of ‖(d₁⊗1)_s(z)‖, ‖(1⊗d₂)_s(z)‖ ≤ ‖d_s(z)‖.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductInequalityReport {
    pub parity_case: ParityCase,
    pub level: usize,
    pub cases: usize,
    pub max_left_violation: f64,
    pub max_right_violation: f64,
    /// Largest entrywise residual of the identities recovering both factor
    /// derivations from d_s(z).
    pub max_recovery_residual: f64,
    /// Smallest observed ‖d_s(z)‖ / max(‖(d₁⊗1)_s(z)‖, ‖(1⊗d₂)_s(z)‖).
    pub min_ratio: f64,
}

impl ProductInequalityReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_left_violation <= tol && self.max_right_violation <= tol && self.max_recovery_residual <= tol
    }
}

/// The three derivation values for one z.
#[derive(Clone, Debug)]
pub struct DerivationValues {
    pub left: ComplexMatrix,
    pub right: ComplexMatrix,
    pub product: ComplexMatrix,
}

impl ProductTriple {
    /// (d₁⊗1)_s(z), (1⊗d₂)_s(z) on (H₁⊗H₂)^{⊕s} and d_s(z) on the product space.
    pub fn derivations(&self, s: usize, tensor_realization: &ComplexMatrix) -> DerivationValues {
        let (t1, t2) = self.factors();
        let left_d = kron(&t1.dirac, &ComplexMatrix::identity(t2.hilbert_dim()));
        let right_d = kron(&ComplexMatrix::identity(t1.hilbert_dim()), &t2.dirac);
        let comm = |d: &ComplexMatrix, x: &ComplexMatrix| &block_left(d, x, s) - &block_right(x, d, s);
        let rep = self.represent(s, tensor_realization);
        DerivationValues {
            left: comm(&left_d, tensor_realization),
            right: comm(&right_d, tensor_realization),
            product: comm(&self.result.dirac, &rep),
        }
    }

    /// Largest residual of the recovery identities for one set of derivation values.
    ///
    /// Graded first factor (Γ = γ₁⊗1): d₁⊗1 = ½(d − ΓdΓ), 1⊗d₂ = ½(Γd + dΓ).
    /// odd×even (Γ = 1⊗γ₂): d₁⊗1 = ½(Γd + dΓ), 1⊗d₂ = ½(d − ΓdΓ).
    /// odd×odd: (d₁⊗1)^{⊕2} = ½(σ₁d + dσ₁), (1⊗d₂)^{⊕2} = ½(σ₂d + dσ₂) with
    /// σ₂ = [[0, i], [−i, 0]].
    pub fn recovery_residual(&self, s: usize, v: &DerivationValues) -> f64 {
        let (t1, t2) = self.factors();
        let (d1, d2) = (t1.hilbert_dim(), t2.hilbert_dim());
        let half = |m: ComplexMatrix| m.scale_real(0.5);
        let conj = |g: &ComplexMatrix, x: &ComplexMatrix| block_sandwich(g, x, g, s);
        let anti = |g: &ComplexMatrix, x: &ComplexMatrix| &block_left(g, x, s) + &block_right(x, g, s);
        match self.case {
            ParityCase::EvenEven | ParityCase::EvenOdd | ParityCase::OddEven => {
                let gamma = if self.case == ParityCase::OddEven {
                    kron(&ComplexMatrix::identity(d1), t2.grading.as_ref().expect("even second factor"))
                } else {
                    kron(t1.grading.as_ref().expect("even first factor"), &ComplexMatrix::identity(d2))
                };
                let odd_part = half(&v.product - &conj(&gamma, &v.product));
                let even_part = half(anti(&gamma, &v.product));
                let (l, r) = if self.case == ParityCase::OddEven { (even_part, odd_part) } else { (odd_part, even_part) };
                l.max_abs_diff(&v.left).max(r.max_abs_diff(&v.right))
            }
            ParityCase::OddOdd => {
                let n = d1 * d2;
                let id = ComplexMatrix::identity(n);
                let i = Complex::new(0.0, 1.0);
                let s1 = kron(&ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).expect("2x2"), &id);
                let s2 = kron(
                    &ComplexMatrix::from_rows(&[vec![Complex::new(0.0, 0.0), i], vec![-i, Complex::new(0.0, 0.0)]]).expect("2x2"),
                    &id,
                );
                let l = half(anti(&s1, &v.product));
                let r = half(anti(&s2, &v.product));
                l.max_abs_diff(&self.represent(s, &v.left)).max(r.max_abs_diff(&self.represent(s, &v.right)))
            }
        }
    }
}

/// Randomized check of the factor inequalities and recovery identities at level s.
pub fn check_product_inequality(p: &ProductTriple, s: usize, trials: usize, seed: u64) -> ProductInequalityReport {
    assert!(s >= 1, "level must be positive");
    let sys = p.tensor_system();
    let per_trial: Vec<(f64, f64, f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = child_rng(seed, t as u64);
            let z = sys.random_element(s, &mut rng);
            let v = p.derivations(s, z.realization());
            let (nl, nr, np) = (operator_norm(&v.left), operator_norm(&v.right), operator_norm(&v.product));
            let scale = 1.0 + np;
            let ratio = if nl.max(nr) > 0.0 { np / nl.max(nr) } else { f64::INFINITY };
            ((nl - np).max(0.0) / scale, (nr - np).max(0.0) / scale, p.recovery_residual(s, &v) / scale, ratio)
        })
        .collect();
    let mut rep = ProductInequalityReport {
        parity_case: p.parity_case(),
        level: s,
        cases: trials,
        max_left_violation: 0.0,
        max_right_violation: 0.0,
        max_recovery_residual: 0.0,
        min_ratio: f64::INFINITY,
    };
    for (l, r, rec, ratio) in per_trial {
        rep.max_left_violation = rep.max_left_violation.max(l);
        rep.max_right_violation = rep.max_right_violation.max(r);
        rep.max_recovery_residual = rep.max_recovery_residual.max(rec);
        rep.min_ratio = rep.min_ratio.min(ratio);
    }
    rep
}

/// ((𝕃_{D₁}⊗1)_s(z), (1⊗𝕃_{D₂})_s(z), L_{(D₁×D₂)^{⊕s}}(z)) for z in the tensor system.
pub fn product_seminorm_factorization(p: &ProductTriple, z: &AmplifiedElement) -> Result<(f64, f64, f64)> {
    if z.system_dim() != p.tensor_system.dim() {
        return Err(QmsError::DimensionMismatch("element is not in the tensor system".into()));
    }
    let s = z.level();
    let (t1, t2) = p.factors();
    let left = SeminormFamily::tensor_left(&t1.seminorm(), t2.hilbert_dim()).eval(s, z.realization())?;
    let right = SeminormFamily::tensor_right(t1.hilbert_dim(), &t2.seminorm()).eval(s, z.realization())?;
    let product = p.result.seminorm().eval(s, &p.represent(s, z.realization()))?;
    Ok((left, right, product))
}

/// Random triple on ℂ^dim: odd triples use M_dim(ℂ) with a random Hermitian D;
/// even triples need dim even and use M_k ⊕ M_k graded by diag(I_k, −I_k).
pub fn sample_triple(dim: usize, parity: Parity, rng: &mut (impl Rng + ?Sized)) -> Result<LipschitzTriple> {
    match parity {
        Parity::Odd => LipschitzTriple::odd(OperatorSystem::full_matrix_algebra(dim), random_hermitian(rng, dim)),
        Parity::Even => {
            if !dim.is_multiple_of(2) || dim == 0 {
                return Err(QmsError::InvalidArgument("even triples need an even Hilbert dimension".into()));
            }
            let k = dim / 2;
            let t = random_complex(rng, k, k);
            let mut dirac = ComplexMatrix::zeros(dim, dim);
            dirac.set_block(0, k, &t);
            dirac.set_block(k, 0, &t.adjoint());
            let gamma = direct_sum(&ComplexMatrix::identity(k), &ComplexMatrix::identity(k).scale_real(-1.0));
            let full = OperatorSystem::full_matrix_algebra(k);
            let mut gens: Vec<ComplexMatrix> = Vec::with_capacity(2 * k * k);
            let zero = ComplexMatrix::zeros(k, k);
            for b in full.basis() {
                gens.push(direct_sum(b, &zero));
                gens.push(direct_sum(&zero, b));
            }
            let system = OperatorSystem::new(dim, gens)?;
            LipschitzTriple::even(system, dirac, gamma)
        }
    }
}

#[cfg(test)]
mod tests;
