//! Monge-Kantorovich distances, diameter constants and approximation defects.
//!
//! Every estimate is a supremum of a ratio N(x)/𝕃_s(x) over selfadjoint x, found
//! by [`maximize_ratio`]. Restricting to selfadjoint x loses nothing: the families
//! are *-invariant, and for a non-selfadjoint x the selfadjoint dilation
//! [[0, x], [x*, 0]] at level 2s has the same numerator and seminorm.

mod approx;
mod mk;
mod solver;
mod space;
mod tensor;

pub use approx::{
    approximation_defect, certify_finite_diameter_via_norm, covering_diagnostic, finite_diameter_constant, ApproxFlags,
    ApproxPair, AuxNorm, CoveringReport, DiameterCertificate,
};
pub use mk::{mk_distance, MkProblem};
pub use solver::{
    grid_oracle, maximize_ratio, maximize_ratio_from, Certificate, HermitianChart, RatioObjective, SolverOptions, SolverReport, ORACLE_MAX_DIM,
};
pub use space::{build_partition_approximation, FiniteMetricSpace, PartitionApproximation};
pub use tensor::{tensor_factor_slice_bound, tensor_product_certification, FactorData, SliceBound, TensorCertification};

use crate::opsys::OperatorSystem;
use crate::seminorms::SeminormFamily;
use crate::{ComplexMatrix, C64};

/// Coordinate gradient g_{ijk} = tr(h_k G_{ij}) of a realization-space gradient G.
pub(crate) fn coord_gradient(sys: &OperatorSystem, s: usize, g: &ComplexMatrix) -> Vec<C64> {
    let d = sys.ambient_dim();
    let mut out = Vec::with_capacity(s * s * sys.dim());
    for i in 0..s {
        for j in 0..s {
            out.extend(sys.coords(&g.block(i * d, j * d, d, d)));
        }
    }
    out
}

pub(crate) fn realize(sys: &OperatorSystem, s: usize, c: &[C64]) -> ComplexMatrix {
    sys.amplify(s, c.to_vec()).expect("coordinate length").realization().clone()
}

/// Chart at level s with ker 𝕃_s removed.
pub(crate) fn chart_for(family: &SeminormFamily, sys: &OperatorSystem, s: usize) -> crate::Result<HermitianChart> {
    let kernel: Vec<Vec<C64>> = family.kernel_basis(sys, s)?.iter().map(|k| k.coeffs().to_vec()).collect();
    Ok(HermitianChart::new(s, sys.dim()).with_kernel(&kernel))
}

/// Denominator 𝕃_s with its coordinate subgradient.
pub(crate) fn seminorm_with_gradient(family: &SeminormFamily, sys: &OperatorSystem, s: usize, c: &[C64]) -> (f64, Vec<C64>) {
    let r = realize(sys, s, c);
    let (v, g) = family.eval_with_gradient(s, &r).expect("level dimensions");
    (v, coord_gradient(sys, s, &g))
}

/// Supremum over a sweep of per-level reports.
pub fn sup_report(reports: &[SolverReport]) -> Option<&SolverReport> {
    reports.iter().max_by(|a, b| {
        a.infinite.cmp(&b.infinite).then(a.value.total_cmp(&b.value))
    })
}


/// Coordinates of I_s ⊗ x from the level-1 coordinates of x.
pub(crate) fn lift_diagonal(c1: &[C64], s: usize) -> Vec<C64> {
    let m = c1.len();
    let mut c = vec![C64::new(0.0, 0.0); s * s * m];
    for i in 0..s {
        c[(i * s + i) * m..(i * s + i + 1) * m].copy_from_slice(c1);
    }
    c
}
