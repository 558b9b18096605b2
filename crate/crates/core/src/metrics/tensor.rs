use serde::{Deserialize, Serialize};

use super::approx::{approximation_defect, finite_diameter_constant, ApproxPair};
use super::solver::{SolverOptions, SolverReport};
use super::sup_report;
use crate::error::{dim_err, QmsError, Result};
use crate::linalg::{kron, operator_norm};
use crate::opsys::{OperatorSystem, UcpMap};
use crate::rng::{child_rng, splitmix64};
use crate::seminorms::{tensor_seminorm_exact, SeminormFamily};
use crate::tolerances::TOL;
use crate::ComplexMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceBound {
    /// ‖z − (ψ ⊗ 1)_s(z)‖
    pub left: f64,
    /// 2C·(𝕃 ⊗ 1)_s(z)
    pub right: f64,
    pub pass: bool,
}

/// (ψ ⊗ id)(A) = Σ_ab ψ(E_ab) A_[a,b] for A ∈ M_dx ⊗ M_dy, re-embedded as 1 ⊗ (·).
fn slice(psi_entries: &ComplexMatrix, a: &ComplexMatrix, dx: usize, dy: usize) -> ComplexMatrix {
    let mut y = ComplexMatrix::zeros(dy, dy);
    for i in 0..dx {
        for j in 0..dx {
            y.axpy(psi_entries[(i, j)], &a.block(i * dy, j * dy, dy, dy));
        }
    }
    kron(&ComplexMatrix::identity(dx), &y)
}

/// Checks ‖z − (ψ ⊗ 1)_s(z)‖ ≤ 2C·(𝕃 ⊗ 1)_s(z) for a state ψ on the first factor.
pub fn tensor_factor_slice_bound(
    family: &SeminormFamily,
    diameter_constant: f64,
    psi: &UcpMap,
    y_dim: usize,
    s: usize,
    z: &ComplexMatrix,
) -> Result<SliceBound> {
    let dx = family.ambient_dim();
    let n = dx * y_dim;
    if psi.input_dim() != dx || psi.target_dim() != 1 {
        return dim_err("ψ must be a state on the first factor");
    }
    if z.rows() != s * n || z.cols() != s * n {
        return dim_err(format!("z must be {}x{}", s * n, s * n));
    }
    let psi_entries = ComplexMatrix::from_fn(dx, dx, |a, b| psi.apply(&ComplexMatrix::unit(dx, dx, a, b))[(0, 0)]);
    let mut sliced = ComplexMatrix::zeros(s * n, s * n);
    for i in 0..s {
        for j in 0..s {
            sliced.set_block(i * n, j * n, &slice(&psi_entries, &z.block(i * n, j * n, n, n), dx, y_dim));
        }
    }
    let left = operator_norm(&(z - &sliced));
    let right = 2.0 * diameter_constant * tensor_seminorm_exact(family, y_dim, s, z)?;
    Ok(SliceBound { left, right, pass: left <= right + TOL.compare })
}

/// One factor of a tensor certification: its system, seminorm family, a matricial
/// approximation carrying an analytic ε and an upper bound on its diameter constant.
#[derive(Clone, Debug)]
pub struct FactorData {
    pub system: OperatorSystem,
    pub family: SeminormFamily,
    pub approx: ApproxPair,
    pub diameter_constant: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TensorCertification {
    /// Largest (𝕃⊗1 or 1⊗𝕂)/𝕄 ratio over the hypothesis samples.
    pub hypothesis_ratio: f64,
    pub defect: Vec<SolverReport>,
    pub defect_bound: f64,
    pub diameter: Vec<SolverReport>,
    pub diameter_bound: f64,
}

impl TensorCertification {
    pub fn measured_defect(&self) -> f64 {
        sup_report(&self.defect).map_or(0.0, |r| r.value)
    }

    pub fn measured_diameter(&self) -> f64 {
        sup_report(&self.diameter).map_or(0.0, |r| r.value)
    }

    pub fn defect_passes(&self) -> bool {
        self.defect.iter().all(|r| !r.infinite && r.value <= self.defect_bound + 1e-6)
    }

    pub fn diameter_passes(&self) -> bool {
        self.diameter.iter().all(|r| !r.infinite && r.value <= self.diameter_bound + 1e-6)
    }

    pub fn passes(&self) -> bool {
        self.defect_passes() && self.diameter_passes()
    }
}

/// Number of random elements per level used to spot-check (𝕃⊗1), (1⊗𝕂) ≤ D·𝕄.
const HYPOTHESIS_SAMPLES: usize = 24;

/// Certifies 𝕄 on 𝒳 ⊗ 𝒴 from factor data: the tensor pair's defect is at most
/// D(ε_X + ε_Y) and the diameter constant at most 2(C_L + C_K)D.
pub fn tensor_product_certification(
    x: &FactorData,
    y: &FactorData,
    m: &SeminormFamily,
    d: f64,
    max_level: usize,
    opts: &SolverOptions,
    seed: u64,
) -> Result<TensorCertification> {
    let (Some(ex), Some(ey)) = (x.approx.epsilon(), y.approx.epsilon()) else {
        return Err(QmsError::InvalidArgument("both approximations need an analytic defect bound".into()));
    };
    let (dx, dy) = (x.system.ambient_dim(), y.system.ambient_dim());
    if m.ambient_dim() != dx * dy {
        return dim_err("𝕄 must act on the tensor product algebra");
    }
    let sys = x.system.tensor(&y.system);
    let left = SeminormFamily::tensor_left(&x.family, dy);
    let right = SeminormFamily::tensor_right(dx, &y.family);
    let mut hypothesis_ratio: f64 = 0.0;
    for s in 1..=max_level {
        let mut rng = child_rng(seed, s as u64);
        for _ in 0..HYPOTHESIS_SAMPLES {
            let z = sys.random_hermitian_element(s, &mut rng);
            let mv = m.eval_element(&z)?;
            let lv = left.eval_element(&z)?.max(right.eval_element(&z)?);
            if lv > d * mv + TOL.compare * (1.0 + mv) {
                return Err(QmsError::HypothesisFailed {
                    reason: format!("(𝕃⊗1 or 1⊗𝕂)_{s}(z) exceeds {d}·𝕄_{s}(z)"),
                    witness: lv / mv.max(f64::MIN_POSITIVE),
                });
            }
            if mv > 0.0 {
                hypothesis_ratio = hypothesis_ratio.max(lv / mv);
            }
        }
    }
    let pair = x.approx.tensor(&y.approx);
    let defect = approximation_defect(&pair, m, max_level, opts, splitmix64(seed, 101))?;
    let diameter = finite_diameter_constant(m, &sys, max_level, opts, splitmix64(seed, 102))?;
    Ok(TensorCertification {
        hypothesis_ratio,
        defect,
        defect_bound: d * (ex + ey),
        diameter,
        diameter_bound: 2.0 * (x.diameter_constant + y.diameter_constant) * d,
    })
}
