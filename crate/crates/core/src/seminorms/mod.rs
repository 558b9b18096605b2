//! Operator seminorm families {𝕃_s}.
//!
//! Every family here is a maximum of weighted norms of linear maps acting
//! entrywise on M_s(M_d): 𝕃_s(x) = max_b w_b ‖T_b(x)‖ with
//! T_b(x) = Σ (I_s ⊗ A) x (I_s ⊗ B). Tensoring a family with the identity of a
//! finite-dimensional factor extends each term by ⊗ I, which is exact for the
//! supremum over UCP maps because (1 ⊗ φ) commutes with T_b ⊗ id and the norm on
//! the tensor product is the supremum over such slices.

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, QmsError, Result};
use crate::linalg::random::random_complex;
use crate::linalg::{block_left, block_right, kron, null_space, operator_norm, top_singular_triplet, Matrix};
use crate::opsys::{apply_ucp_right, AmplifiedElement, OperatorSystem, UcpSampler};
use crate::rng::child_rng;
use crate::tolerances::TOL;
use crate::{ComplexMatrix, C64};

/// One summand of a branch map.
#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    /// x ↦ A x
    Left(ComplexMatrix),
    /// x ↦ x B
    Right(ComplexMatrix),
    /// x ↦ A x B
    Sandwich(ComplexMatrix, ComplexMatrix),
    /// x ↦ c x
    Scale(C64),
}

impl Term {
    fn apply(&self, x: &ComplexMatrix, s: usize) -> ComplexMatrix {
        match self {
            Term::Left(a) => block_left(a, x, s),
            Term::Right(b) => block_right(x, b, s),
            Term::Sandwich(a, b) => block_left(a, &block_right(x, b, s), s),
            Term::Scale(c) => x.scale(*c),
        }
    }

    fn lift(&self, f: &impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Term {
        match self {
            Term::Left(a) => Term::Left(f(a)),
            Term::Right(b) => Term::Right(f(b)),
            Term::Sandwich(a, b) => Term::Sandwich(f(a), f(b)),
            Term::Scale(c) => Term::Scale(*c),
        }
    }
}

/// Weighted linear map T with 𝕃 contribution weight · ‖T(x)‖.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub weight: f64,
    pub terms: Vec<Term>,
}

impl Branch {
    /// Unweighted T(x) at level s.
    pub fn apply(&self, x: &ComplexMatrix, s: usize) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(x.rows(), x.cols());
        for t in &self.terms {
            out += &t.apply(x, s);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeminormKind {
    Commutator,
    Action,
    TensorLeft,
    TensorRight,
    Max,
    Stabilized,
    /// max over point pairs of ‖f(p) − f(q)‖/ρ(p, q) on a finite metric space.
    Lipschitz,
}

impl std::fmt::Display for SeminormKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SeminormKind::Commutator => "commutator",
            SeminormKind::Action => "action",
            SeminormKind::TensorLeft => "tensor-left",
            SeminormKind::TensorRight => "tensor-right",
            SeminormKind::Max => "max",
            SeminormKind::Stabilized => "stabilized",
            SeminormKind::Lipschitz => "lipschitz",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct SeminormFamily {
    kind: SeminormKind,
    ambient_dim: usize,
    branches: Vec<Branch>,
}

impl SeminormFamily {
    /// 𝕃_s(x) = ‖[D^{⊕s}, x]‖ for Hermitian D.
    pub fn commutator(dirac: &ComplexMatrix) -> Result<Self> {
        if !dirac.is_square() {
            return dim_err("Dirac operator must be square");
        }
        if !dirac.is_hermitian(TOL.hermitian) {
            return Err(QmsError::NotHermitian { residual: dirac.hermitian_residual() });
        }
        Ok(Self {
            kind: SeminormKind::Commutator,
            ambient_dim: dirac.rows(),
            branches: vec![Branch { weight: 1.0, terms: vec![Term::Left(dirac.clone()), Term::Right(-dirac)] }],
        })
    }

    /// 𝕃_s(x) = max_g ‖W_g x W_g* − x‖ / ℓ(g) over (unitary, length) pairs with ℓ > 0.
    pub fn action(unitaries: &[(ComplexMatrix, f64)]) -> Result<Self> {
        let Some((first, _)) = unitaries.first() else {
            return Err(QmsError::InvalidArgument("action needs at least one group element".into()));
        };
        let d = first.rows();
        let mut branches = Vec::with_capacity(unitaries.len());
        for (w, len) in unitaries {
            if w.rows() != d || !w.is_square() {
                return dim_err("action unitaries must share one square size");
            }
            if !(*len > 0.0 && len.is_finite()) {
                return Err(QmsError::InvalidArgument(format!("length must be positive, got {len}")));
            }
            branches.push(Branch {
                weight: 1.0 / len,
                terms: vec![Term::Sandwich(w.clone(), w.adjoint()), Term::Scale(Complex::new(-1.0, 0.0))],
            });
        }
        Ok(Self { kind: SeminormKind::Action, ambient_dim: d, branches })
    }

    /// Family from explicit branches (used by models with their own structure).
    pub fn from_branches(kind: SeminormKind, ambient_dim: usize, branches: Vec<Branch>) -> Self {
        Self { kind, ambient_dim, branches }
    }

    /// 𝕃 ⊗ 1 on 𝒳 ⊗ 𝒴 with 𝒴 ⊆ M_{y_dim}.
    pub fn tensor_left(base: &SeminormFamily, y_dim: usize) -> Self {
        let iy = ComplexMatrix::identity(y_dim);
        Self {
            kind: SeminormKind::TensorLeft,
            ambient_dim: base.ambient_dim * y_dim,
            branches: base.lift_branches(&|a: &ComplexMatrix| kron(a, &iy)),
        }
    }

    /// 1 ⊗ 𝕂 on 𝒳 ⊗ 𝒴 with 𝒳 ⊆ M_{x_dim}.
    pub fn tensor_right(x_dim: usize, base: &SeminormFamily) -> Self {
        let ix = ComplexMatrix::identity(x_dim);
        Self {
            kind: SeminormKind::TensorRight,
            ambient_dim: x_dim * base.ambient_dim,
            branches: base.lift_branches(&|a: &ComplexMatrix| kron(&ix, a)),
        }
    }

    /// Pointwise maximum of two families on the same system.
    pub fn max(a: &SeminormFamily, b: &SeminormFamily) -> Result<Self> {
        if a.ambient_dim != b.ambient_dim {
            return dim_err("max of families on different ambient algebras");
        }
        let mut branches = a.branches.clone();
        branches.extend(b.branches.iter().cloned());
        Ok(Self { kind: SeminormKind::Max, ambient_dim: a.ambient_dim, branches })
    }

    /// Family on M_n(𝒳): 𝕃'_s(z) = 𝕃_{s·n}(I_s(z)).
    pub fn stabilized(base: &SeminormFamily, n: usize) -> Self {
        let i_n = ComplexMatrix::identity(n);
        Self {
            kind: SeminormKind::Stabilized,
            ambient_dim: base.ambient_dim * n,
            branches: base.lift_branches(&|a: &ComplexMatrix| kron(&i_n, a)),
        }
    }

    fn lift_branches(&self, f: &impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Vec<Branch> {
        self.branches
            .iter()
            .map(|b| Branch { weight: b.weight, terms: b.terms.iter().map(|t| t.lift(f)).collect() })
            .collect()
    }

    pub fn kind(&self) -> SeminormKind {
        self.kind
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// 𝕃_s evaluated on a realization in M_{s·d}(ℂ).
    pub fn eval(&self, s: usize, x: &ComplexMatrix) -> Result<f64> {
        let n = s * self.ambient_dim;
        if s == 0 || x.rows() != n || x.cols() != n {
            return dim_err(format!("level {s} needs a {n}x{n} realization, got {}x{}", x.rows(), x.cols()));
        }
        Ok(self.eval_unchecked(s, x))
    }

    pub(crate) fn eval_unchecked(&self, s: usize, x: &ComplexMatrix) -> f64 {
        self.branches.iter().map(|b| b.weight * operator_norm(&b.apply(x, s))).fold(0.0, f64::max)
    }

    /// 𝕃_s(x) together with a supergradient G in realization space:
    /// 𝕃_s(x + h) ≥ 𝕃_s(x) + Re tr(G* h), taken at the active branch and top singular pair.
    pub fn eval_with_gradient(&self, s: usize, x: &ComplexMatrix) -> Result<(f64, ComplexMatrix)> {
        self.eval(s, x)?;
        let n = x.rows();
        let mut best: Option<(f64, &Branch, ComplexMatrix)> = None;
        for b in &self.branches {
            let t = b.apply(x, s);
            let v = b.weight * operator_norm(&t);
            if best.as_ref().is_none_or(|(bv, _, _)| v > *bv) {
                best = Some((v, b, t));
            }
        }
        let Some((value, branch, t)) = best else { return Ok((0.0, ComplexMatrix::zeros(n, n))) };
        if value == 0.0 {
            return Ok((0.0, ComplexMatrix::zeros(n, n)));
        }
        let (_, u, w) = top_singular_triplet(&t);
        let mut g = ComplexMatrix::zeros(n, n);
        let mut rank_one = |a: &[C64], b: &[C64], c: C64| {
            for (i, ai) in a.iter().enumerate() {
                let ai = ai * c;
                for (j, bj) in b.iter().enumerate() {
                    g[(i, j)] += ai * bj.conj();
                }
            }
        };
        let wt = Complex::new(branch.weight, 0.0);
        for term in &branch.terms {
            match term {
                Term::Left(a) => rank_one(&block_mat_vec(&a.adjoint(), &u, s), &w, wt),
                Term::Right(b) => rank_one(&u, &block_mat_vec(b, &w, s), wt),
                Term::Sandwich(a, b) => rank_one(&block_mat_vec(&a.adjoint(), &u, s), &block_mat_vec(b, &w, s), wt),
                Term::Scale(c) => rank_one(&u, &w, wt * c.conj()),
            }
        }
        Ok((value, g))
    }

    pub fn eval_element(&self, z: &AmplifiedElement) -> Result<f64> {
        self.eval(z.level(), z.realization())
    }

    /// Level-s defining map assembled column by column on the coordinates of M_s(𝒳).
    fn level_map(&self, sys: &OperatorSystem, s: usize) -> ComplexMatrix {
        let m = sys.dim();
        let cols = s * s * m;
        let block = (s * self.ambient_dim).pow(2);
        let rows = block * self.branches.len();
        let columns: Vec<Vec<C64>> = (0..cols)
            .into_par_iter()
            .map(|c| {
                let mut coeffs = vec![C64::zero(); cols];
                coeffs[c] = Complex::new(1.0, 0.0);
                let x = sys.amplify(s, coeffs).expect("unit coordinate");
                let mut col = Vec::with_capacity(rows);
                for b in &self.branches {
                    col.extend_from_slice(b.apply(x.realization(), s).data());
                }
                col
            })
            .collect();
        Matrix::from_fn(rows, cols, |r, c| columns[c][r])
    }

    /// Basis of ker 𝕃_s ⊆ M_s(𝒳) via the null space of the defining map.
    pub fn kernel_basis(&self, sys: &OperatorSystem, s: usize) -> Result<Vec<AmplifiedElement>> {
        if sys.ambient_dim() != self.ambient_dim {
            return dim_err("system and family live on different algebras");
        }
        if s == 0 {
            return dim_err("level must be positive");
        }
        let map = self.level_map(sys, s);
        null_space(&map, TOL.rank_cutoff).into_iter().map(|v| sys.amplify(s, v)).collect()
    }

    /// Randomized check of the operator seminorm axioms and Lipschitz properties.
    pub fn check_axioms(&self, sys: &OperatorSystem, max_level: usize, trials: usize, seed: u64) -> Result<AxiomReport> {
        if max_level < 2 {
            return Err(QmsError::InvalidArgument("check_axioms needs max_level >= 2".into()));
        }
        if sys.ambient_dim() != self.ambient_dim {
            return dim_err("system and family live on different algebras");
        }
        let per: Vec<[f64; 5]> = (0..trials)
            .into_par_iter()
            .map(|t| {
                use rand::Rng;
                let mut rng = child_rng(seed, t as u64);
                let s = rng.random_range(1..max_level);
                let r = rng.random_range(1..=(max_level - s));
                let x = sys.random_element(s, &mut rng);
                let y = sys.random_element(r, &mut rng);
                let lx = self.eval_unchecked(s, x.realization());
                let ly = self.eval_unchecked(r, y.realization());
                let lxy = self.eval_unchecked(s + r, sys.direct_sum(&x, &y).realization());
                let ds = (lxy - lx.max(ly)).abs();

                let t_level = rng.random_range(1..=max_level);
                let v = random_complex::<f64>(&mut rng, t_level, s);
                let w = random_complex::<f64>(&mut rng, s, t_level);
                let vxw = sys.bimodule(&v, &x, &w).expect("bimodule shapes");
                let bound = operator_norm(&v) * lx * operator_norm(&w);
                let bim = (self.eval_unchecked(t_level, vxw.realization()) - bound).max(0.0);

                let star = (self.eval_unchecked(s, sys.adjoint(&x).realization()) - lx).abs();
                let scalar = self.eval_unchecked(s, sys.scalar(&random_complex::<f64>(&mut rng, s, s)).realization());
                let entry = entrywise_bounds(self, sys, &x);
                [ds, bim, star, scalar, entry.upper_violation.max(entry.lower_violation)]
            })
            .collect();
        let mut rep = AxiomReport { cases: trials, ..Default::default() };
        for r in per {
            rep.direct_sum_max_residual = rep.direct_sum_max_residual.max(r[0]);
            rep.bimodule_violation = rep.bimodule_violation.max(r[1]);
            rep.star_residual = rep.star_residual.max(r[2]);
            rep.scalar_residual = rep.scalar_residual.max(r[3]);
            rep.entrywise_violation = rep.entrywise_violation.max(r[4]);
        }
        Ok(rep)
    }
}

/// Worst residuals found by [`SeminormFamily::check_axioms`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub direct_sum_max_residual: f64,
    pub bimodule_violation: f64,
    pub star_residual: f64,
    pub scalar_residual: f64,
    pub entrywise_violation: f64,
    pub cases: usize,
}

impl AxiomReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.direct_sum_max_residual <= tol
            && self.bimodule_violation <= tol
            && self.star_residual <= tol
            && self.scalar_residual <= tol
            && self.entrywise_violation <= tol
    }
}

/// Both entrywise inequalities 𝕃_s(x) ≤ Σ 𝕃_1(x_ij) and 𝕃_1(x_kl) ≤ 𝕃_s(x).
#[derive(Clone, Debug, PartialEq)]
pub struct EntrywiseReport {
    pub level_value: f64,
    pub entry_sum: f64,
    pub entry_max: f64,
    pub upper_violation: f64,
    pub lower_violation: f64,
}

impl EntrywiseReport {
    pub fn passes(&self) -> bool {
        self.upper_violation <= TOL.compare && self.lower_violation <= TOL.compare
    }
}

pub fn entrywise_bounds(f: &SeminormFamily, sys: &OperatorSystem, z: &AmplifiedElement) -> EntrywiseReport {
    let s = z.level();
    let level_value = f.eval_unchecked(s, z.realization());
    let mut entry_sum = 0.0;
    let mut entry_max: f64 = 0.0;
    for i in 0..s {
        for j in 0..s {
            let v = f.eval_unchecked(1, sys.entry(z, i, j).realization());
            entry_sum += v;
            entry_max = entry_max.max(v);
        }
    }
    EntrywiseReport {
        level_value,
        entry_sum,
        entry_max,
        upper_violation: (level_value - entry_sum).max(0.0),
        lower_violation: (entry_max - level_value).max(0.0),
    }
}

/// (I_s ⊗ a) v.
fn block_mat_vec(a: &ComplexMatrix, v: &[C64], s: usize) -> Vec<C64> {
    let d = a.rows();
    let mut out = Vec::with_capacity(v.len());
    for blk in 0..s {
        out.extend(a.mat_vec(&v[blk * d..(blk + 1) * d]));
    }
    out
}

/// (𝕃 ⊗ 1)_s(z) computed exactly through the extended branch maps.
pub fn tensor_seminorm_exact(base: &SeminormFamily, y_dim: usize, s: usize, z: &ComplexMatrix) -> Result<f64> {
    SeminormFamily::tensor_left(base, y_dim).eval(s, z)
}

/// Result of the sampled supremum over UCP slices.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledTensor {
    pub value: f64,
    pub best_index: usize,
    pub samples: usize,
}

/// max over the first `n_samples` maps of [`UcpSampler`] of 𝕃_{s·n}(I_s((1 ⊗ φ)_s(z))).
pub fn tensor_seminorm_sampled(
    base: &SeminormFamily,
    xs: &OperatorSystem,
    ys: &OperatorSystem,
    z: &AmplifiedElement,
    n_samples: usize,
    seed: u64,
) -> Result<SampledTensor> {
    if base.ambient_dim() != xs.ambient_dim() {
        return dim_err("family does not act on the first factor");
    }
    let sampler = UcpSampler::new(ys.ambient_dim(), seed);
    let values: Vec<Result<f64>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let phi = sampler.map(i);
            let nested = apply_ucp_right(xs, ys, z, &phi)?;
            let flat = xs.forget_subdivisions(&nested)?;
            base.eval(flat.level(), flat.realization())
        })
        .collect();
    let mut best = SampledTensor { value: 0.0, best_index: 0, samples: n_samples };
    for (i, v) in values.into_iter().enumerate() {
        let v = v?;
        if v > best.value {
            best.value = v;
            best.best_index = i;
        }
    }
    Ok(best)
}

/// M = max(𝕃 ⊗ 1, 1 ⊗ 𝕂) on 𝒳 ⊗ 𝒴.
pub fn max_seminorm(left: &SeminormFamily, right: &SeminormFamily) -> SeminormFamily {
    let lt = SeminormFamily::tensor_left(left, right.ambient_dim());
    let rt = SeminormFamily::tensor_right(left.ambient_dim(), right);
    SeminormFamily::max(&lt, &rt).expect("same ambient dimension by construction")
}
