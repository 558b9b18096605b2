//! Versioned JSON experiment configuration.
//!
//! Every task field has a default, so `{"command": "torus"}` is a complete task.

use serde::{Deserialize, Serialize};

use qms_core::metrics::SolverOptions;

/// Current config schema version.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub experiment_id: String,
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverConfig,
    pub task: Task,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub restarts: usize,
    pub iterations: usize,
    /// Brute-force validation of small problems.
    pub oracle: bool,
    /// Slack allowed when comparing a measured value with its bound.
    pub tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = SolverOptions::default();
        Self { restarts: o.restarts, iterations: o.iterations, oracle: false, tolerance: 1e-9 }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolverOptions {
        SolverOptions { restarts: self.restarts, iterations: self.iterations, oracle: self.oracle, ..SolverOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Task {
    Axioms(AxiomsTask),
    MkDist(MkTask),
    Diameter(DiameterTask),
    Defect(DefectTask),
    Ergodic(ErgodicTask),
    Torus(TorusTask),
    Product(ProductTask),
    TensorCertify(TensorTask),
    Covering(CoveringTask),
}

impl Task {
    pub fn command(&self) -> &'static str {
        match self {
            Task::Axioms(_) => "axioms",
            Task::MkDist(_) => "mk-dist",
            Task::Diameter(_) => "diameter",
            Task::Defect(_) => "defect",
            Task::Ergodic(_) => "ergodic",
            Task::Torus(_) => "torus",
            Task::Product(_) => "product",
            Task::TensorCertify(_) => "tensor-certify",
            Task::Covering(_) => "covering",
        }
    }

    /// Task with every parameter at its default.
    pub fn default_for(command: &str) -> serde_json::Result<Self> {
        serde_json::from_value(serde_json::json!({ "command": command }))
    }
}

/// Quantum metric space under study, with its canonical seminorm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Finite metric space with the Lipschitz seminorm.
    MetricSpace { distances: Vec<Vec<f64>> },
    /// Points of ℝ^k with the Euclidean metric.
    Points { points: Vec<Vec<f64>> },
    /// M_q with the ergodic Weyl action of ℤ_q × ℤ_q.
    FuzzyTorus { q: usize, p: usize },
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::Points { points: vec![vec![0.0], vec![0.6], vec![1.5]] }
    }
}

/// Approximation map: a partition of unity on a metric space or a weighted
/// average over the group of a fuzzy torus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ApproxSpec {
    Partition { epsilon: f64 },
    Uniform,
    PointMass,
    Fejer { order: usize },
    /// Weights ψ(g) in group index order, mean 1.
    Explicit { values: Vec<f64> },
}

impl Default for ApproxSpec {
    fn default() -> Self {
        ApproxSpec::Partition { epsilon: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AxiomsTask {
    pub q: usize,
    pub p: usize,
    pub trials: usize,
    pub max_level: usize,
    /// Largest level for the kernel dimension identity.
    pub kernel_level: usize,
}

impl Default for AxiomsTask {
    fn default() -> Self {
        Self { q: 3, p: 1, trials: 200, max_level: 4, kernel_level: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MkTask {
    pub space: ModelSpec,
    /// Probability vectors of the two states.
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    /// Reference value, checked to 1e-3 relative. Two-point spaces supply it themselves.
    pub expected: Option<f64>,
}

impl Default for MkTask {
    fn default() -> Self {
        Self {
            space: ModelSpec::MetricSpace { distances: vec![vec![0.0, 1.0], vec![1.0, 0.0]] },
            phi: vec![1.0, 0.0],
            psi: vec![0.0, 1.0],
            expected: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiameterTask {
    pub model: ModelSpec,
    pub max_level: usize,
}

impl Default for DiameterTask {
    fn default() -> Self {
        Self { model: ModelSpec::default(), max_level: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DefectTask {
    pub model: ModelSpec,
    pub approx: ApproxSpec,
    pub max_level: usize,
}

impl Default for DefectTask {
    fn default() -> Self {
        Self { model: ModelSpec::default(), approx: ApproxSpec::default(), max_level: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ErgodicTask {
    pub q: usize,
    pub p: usize,
    /// Random amplifications per weight and level for the averaging bound.
    pub trials: usize,
    pub max_level: usize,
    pub diameter_level: usize,
}

impl Default for ErgodicTask {
    fn default() -> Self {
        Self { q: 5, p: 2, trials: 500, max_level: 3, diameter_level: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TorusTask {
    pub p: usize,
    pub q: usize,
    pub degree: i32,
    pub trials: usize,
    pub grid: usize,
    pub max_level: usize,
    /// Doublings of the grid in the refinement table.
    pub refinements: usize,
}

impl Default for TorusTask {
    fn default() -> Self {
        Self { p: 2, q: 5, degree: 3, trials: 100, grid: 16, max_level: 2, refinements: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProductTask {
    /// Hilbert dimension of each random factor (even).
    pub dim: usize,
    pub trials: usize,
    pub max_level: usize,
}

impl Default for ProductTask {
    fn default() -> Self {
        Self { dim: 2, trials: 200, max_level: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuzzyFactor {
    pub q: usize,
    pub p: usize,
    pub approx: ApproxSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TensorTask {
    pub first: FuzzyFactor,
    pub second: FuzzyFactor,
    pub max_level: usize,
}

impl Default for TensorTask {
    fn default() -> Self {
        Self {
            first: FuzzyFactor { q: 2, p: 1, approx: ApproxSpec::Uniform },
            second: FuzzyFactor { q: 3, p: 1, approx: ApproxSpec::Fejer { order: 1 } },
            max_level: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoveringTask {
    pub model: ModelSpec,
    pub epsilons: Vec<f64>,
    pub samples: usize,
}

impl Default for CoveringTask {
    fn default() -> Self {
        Self {
            model: ModelSpec::MetricSpace { distances: vec![vec![0.0, 1.0], vec![1.0, 0.0]] },
            epsilons: vec![0.0625, 0.125, 0.25, 0.5],
            samples: 2000,
        }
    }
}
