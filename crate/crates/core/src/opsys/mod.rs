//! Operator systems, their matrix amplifications, quotient norms and UCP maps.

mod quotient;
mod system;
mod ucp;

pub use quotient::{quotient_norm, quotient_norm_matrix, quotient_norm_warm, QuotientOptions, QuotientReport};
pub use system::{AmplifiedElement, NestedElement, OperatorSystem};
pub use ucp::{apply_ucp_left, apply_ucp_right, sample_ucp, UcpMap, UcpSampler};
