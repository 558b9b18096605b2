use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::approx::{ApproxFlags, ApproxPair};
use crate::error::{QmsError, Result};
use crate::opsys::{OperatorSystem, UcpMap};
use crate::seminorms::{Branch, SeminormFamily, SeminormKind, Term};
use crate::ComplexMatrix;

/// Finite metric space; functions on it are diagonal matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteMetricSpace {
    dist: Vec<Vec<f64>>,
}

impl FiniteMetricSpace {
    /// Validates symmetry, positivity off the diagonal and the triangle inequality.
    pub fn new(dist: Vec<Vec<f64>>) -> Result<Self> {
        let n = dist.len();
        if n == 0 {
            return Err(QmsError::EmptySpace);
        }
        let bad = |msg: String| Err(QmsError::InvalidMetric(msg));
        if dist.iter().any(|row| row.len() != n) {
            return bad(format!("distance matrix must be {n}x{n}"));
        }
        for i in 0..n {
            if dist[i][i] != 0.0 {
                return bad(format!("ρ({i}, {i}) = {} ≠ 0", dist[i][i]));
            }
            for j in 0..n {
                let d = dist[i][j];
                if i != j && !(d > 0.0 && d.is_finite()) {
                    return bad(format!("ρ({i}, {j}) = {d} must be positive and finite"));
                }
                if (d - dist[j][i]).abs() > 1e-12 * (1.0 + d) {
                    return bad(format!("ρ({i}, {j}) ≠ ρ({j}, {i})"));
                }
                for k in 0..n {
                    if d > dist[i][k] + dist[k][j] + 1e-12 * (1.0 + d) {
                        return bad(format!("triangle inequality fails at ({i}, {k}, {j})"));
                    }
                }
            }
        }
        Ok(Self { dist })
    }

    /// Points of ℝ^k with the Euclidean metric.
    pub fn euclidean(points: &[Vec<f64>]) -> Result<Self> {
        let dist = points
            .iter()
            .map(|p| points.iter().map(|q| p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()).collect())
            .collect();
        Self::new(dist)
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn distance(&self, p: usize, q: usize) -> f64 {
        self.dist[p][q]
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// Smallest distance between distinct points (∞ for a single point).
    pub fn separation(&self) -> f64 {
        let n = self.len();
        (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| self.dist[i][j]).fold(f64::INFINITY, f64::min)
    }

    pub fn system(&self) -> OperatorSystem {
        OperatorSystem::diagonal(self.len())
    }

    /// L(f) = max_{p≠q} ‖f(p) − f(q)‖/ρ(p, q), amplified entrywise.
    ///
    /// The pair (p, q) branch maps f to (f(p) − f(q))·E_pp via E_pp f E_pp − E_pq f E_qp.
    pub fn lipschitz_seminorm(&self) -> SeminormFamily {
        let n = self.len();
        let e = |i, j| ComplexMatrix::unit(n, n, i, j);
        let mut branches = Vec::new();
        for p in 0..n {
            for q in (p + 1)..n {
                branches.push(Branch {
                    weight: 1.0 / self.dist[p][q],
                    terms: vec![Term::Sandwich(e(p, p), e(p, p)), Term::Sandwich(-&e(p, q), e(q, p))],
                });
            }
        }
        SeminormFamily::from_branches(SeminormKind::Lipschitz, n, branches)
    }

    /// Evaluation at a point.
    pub fn point_state(&self, p: usize) -> UcpMap {
        UcpMap::basis_state(self.len(), p)
    }

    /// Diagonal matrix of function values.
    pub fn function(&self, values: &[f64]) -> ComplexMatrix {
        assert_eq!(values.len(), self.len(), "one value per point");
        ComplexMatrix::from_real_diag(values)
    }
}

/// Partition-of-unity approximation Φ_ε(f) = Σ_j f(p_j)·φ_j.
#[derive(Clone, Debug)]
pub struct PartitionApproximation {
    pub pair: ApproxPair,
    pub centres: Vec<usize>,
    /// weights[x][j] = φ_j(x).
    pub weights: Vec<Vec<f64>>,
}

/// Greedy ε-net centres and normalized hats max(0, ε − ρ(·, p_j)).
///
/// Each point is within ε of a centre, so φ_j(x) > 0 only where ρ(x, p_j) < ε and
/// |f(x) − Φ_ε(f)(x)| ≤ Σ_j φ_j(x)|f(x) − f(p_j)| ≤ ε·L(f).
pub fn build_partition_approximation(space: &FiniteMetricSpace, epsilon: f64) -> Result<PartitionApproximation> {
    if space.is_empty() {
        return Err(QmsError::EmptySpace);
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(QmsError::InvalidArgument(format!("ε must be positive, got {epsilon}")));
    }
    let n = space.len();
    let mut centres: Vec<usize> = Vec::new();
    for p in 0..n {
        if centres.iter().all(|&c| space.distance(p, c) >= epsilon) {
            centres.push(p);
        }
    }
    let weights: Vec<Vec<f64>> = (0..n)
        .map(|x| {
            let raw: Vec<f64> = centres.iter().map(|&c| (epsilon - space.distance(x, c)).max(0.0)).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|w| w / total).collect()
        })
        .collect();
    let map = |f: &ComplexMatrix| {
        let diag: Vec<_> = (0..n)
            .map(|x| weights[x].iter().zip(&centres).map(|(w, &c)| f[(c, c)] * *w).sum::<Complex<f64>>())
            .collect();
        ComplexMatrix::from_diag(&diag)
    };
    let flags = ApproxFlags { positive: true, isometric: true, completely_positive: true };
    let pair = ApproxPair::from_map(space.system(), map, flags)?.with_epsilon(epsilon);
    Ok(PartitionApproximation { pair, centres, weights })
}
