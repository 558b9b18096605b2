//! Numerical workbench for finite-dimensional quantum metric geometry.

pub mod linalg;
pub mod metrics;
pub mod models;
pub mod opsys;
pub mod rng;
pub mod scalar;
pub mod seminorms;
pub mod tolerances;
pub mod triples;

mod error;

pub use error::{QmsError, Result};
pub use num_complex::Complex;
pub use scalar::Real;

/// Double-precision complex scalar.
pub type C64 = Complex<f64>;
/// Double-precision complex matrix, the carrier for every operator in the crate.
pub type ComplexMatrix = linalg::Matrix<f64>;
/// Single-precision complex matrix.
pub type ComplexMatrix32 = linalg::Matrix<f32>;
/// Double-precision Hermitian eigendecomposition.
pub type HermitianEigenResult = linalg::HermitianEigen<f64>;
