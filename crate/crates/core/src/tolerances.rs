//! Tolerance constants shared by every module.

/// Numerical thresholds used for validation and comparisons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Hermiticity and structural identity checks.
    pub hermitian: f64,
    /// Inequality comparisons between computed quantities.
    pub compare: f64,
    /// Relative singular-value cutoff for rank decisions.
    pub rank_cutoff: f64,
    /// Witness ratio above which a Monge-Kantorovich distance is declared infinite.
    pub infinite_ratio: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        hermitian: 1e-10,
        compare: 1e-9,
        rank_cutoff: 1e-8,
        infinite_ratio: 1e6,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Default tolerance record.
pub const TOL: Tolerances = Tolerances::DEFAULT;
