use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QmsError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("invalid operator system: {0}")]
    InvalidOperatorSystem(String),
    #[error("element does not lie in the operator system (residual {residual:.3e})")]
    NotInSystem { residual: f64 },
    #[error("solver did not converge: {0}")]
    SolverDidNotConverge(String),
    #[error("operation not supported for seminorm kind {0}")]
    UnsupportedKind(String),
    #[error("parity mismatch: {0}")]
    ParityMismatch(String),
    #[error("empty metric space")]
    EmptySpace,
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("theta must be rational p/q with q >= 1 and gcd(p, q) = 1: {0}")]
    IrrationalTheta(String),
    #[error("hypothesis failed: {reason} (witness ratio {witness:.6e})")]
    HypothesisFailed { reason: String, witness: f64 },
    #[error("invalid triple: {0}")]
    InvalidTriple(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, QmsError>;

pub(crate) fn dim_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(QmsError::DimensionMismatch(msg.into()))
}
