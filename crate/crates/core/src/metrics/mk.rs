use super::solver::{maximize_ratio, RatioObjective, SolverOptions, SolverReport};
use super::{chart_for, seminorm_with_gradient};
use crate::error::{dim_err, QmsError, Result};
use crate::linalg::{operator_norm, top_singular_triplet};
use crate::opsys::{OperatorSystem, UcpMap};
use crate::seminorms::SeminormFamily;
use crate::tolerances::TOL;
use crate::{ComplexMatrix, C64};

/// ρ_L(φ, ψ) = sup ‖φ(x) − ψ(x)‖ over 𝕃_1(x) ≤ 1, for UCP maps into a common M_n.
#[derive(Clone, Debug)]
pub struct MkProblem {
    pub family: SeminormFamily,
    pub system: OperatorSystem,
    pub phi: UcpMap,
    pub psi: UcpMap,
}

impl MkProblem {
    pub fn new(family: SeminormFamily, system: OperatorSystem, phi: UcpMap, psi: UcpMap) -> Result<Self> {
        let d = system.ambient_dim();
        if family.ambient_dim() != d || phi.input_dim() != d || psi.input_dim() != d {
            return dim_err("family, system and maps must act on the same algebra");
        }
        if phi.target_dim() != psi.target_dim() {
            return dim_err("φ and ψ must share a target dimension");
        }
        for (name, map) in [("φ", &phi), ("ψ", &psi)] {
            let err = map.unitality_error();
            if err > TOL.hermitian {
                return Err(QmsError::InvalidArgument(format!("{name} is not unital (error {err:.3e})")));
            }
        }
        Ok(Self { family, system, phi, psi })
    }

    /// Δ_k = φ(h_k) − ψ(h_k) on the working basis.
    fn differences(&self) -> Vec<ComplexMatrix> {
        self.system.basis().iter().map(|h| &self.phi.apply(h) - &self.psi.apply(h)).collect()
    }

    /// Swapped problem ρ(ψ, φ).
    pub fn reversed(&self) -> Self {
        Self { psi: self.phi.clone(), phi: self.psi.clone(), ..self.clone() }
    }
}

struct MkObjective<'a> {
    problem: &'a MkProblem,
    deltas: Vec<ComplexMatrix>,
}

fn combine(deltas: &[ComplexMatrix], c: &[C64]) -> ComplexMatrix {
    let n = deltas[0].rows();
    let mut y = ComplexMatrix::zeros(n, n);
    for (ck, dk) in c.iter().zip(deltas) {
        y.axpy(*ck, dk);
    }
    y
}

impl RatioObjective for MkObjective<'_> {
    type Warm = ();

    fn numerator(&self, c: &[C64], _: &mut ()) -> (f64, Vec<C64>) {
        let y = combine(&self.deltas, c);
        let (sigma, u, w) = top_singular_triplet(&y);
        let g = self
            .deltas
            .iter()
            .map(|dk| {
                let dw = dk.mat_vec(&w);
                u.iter().zip(&dw).map(|(a, b)| a.conj() * b).sum::<C64>().conj()
            })
            .collect();
        (sigma, g)
    }

    fn denominator(&self, c: &[C64]) -> (f64, Vec<C64>) {
        seminorm_with_gradient(&self.problem.family, &self.problem.system, 1, c)
    }
}

/// Monge-Kantorovich distance between φ and ψ.
///
/// If some kernel element of 𝕃_1 separates φ from ψ the distance is +∞; the
/// report then carries `infinite` and the witness ratio ‖Δ(κ)‖/𝕃_1(κ).
pub fn mk_distance(p: &MkProblem, opts: &SolverOptions, seed: u64) -> Result<SolverReport> {
    let deltas = p.differences();
    if deltas.iter().all(|d| d.max_abs() <= 1e-14) {
        return Ok(SolverReport::trivial(seed));
    }
    for kappa in p.family.kernel_basis(&p.system, 1)? {
        let gap = operator_norm(&combine(&deltas, kappa.coeffs()));
        if gap > TOL.rank_cutoff * (1.0 + kappa.norm()) {
            let l = p.family.eval_element(&kappa)?;
            let witness = gap / l.max(f64::EPSILON * kappa.norm());
            if witness > TOL.infinite_ratio {
                return Ok(SolverReport::infinite(witness, seed));
            }
        }
    }
    let chart = chart_for(&p.family, &p.system, 1)?;
    let obj = MkObjective { problem: p, deltas };
    let (report, _) = maximize_ratio(&obj, &chart, opts, seed);
    Ok(report)
}

