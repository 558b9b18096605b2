//! Dense complex linear algebra, generic over the real scalar type.

pub mod clifford;
pub mod eigen;
pub mod matrix;
pub mod random;
pub mod svd;

pub use clifford::{clifford_generators, pauli};
pub use eigen::{
    hermitian_eigen, hermitian_eigenvalues, operator_norm, singular_triplets, top_singular_triplet, HermitianEigen,
};
pub use matrix::{anticommutator, block_diag, block_left, block_right, block_sandwich, commutator, direct_sum, kron, Matrix};
pub use svd::{null_space, rank, right_svd, RightSvd};
