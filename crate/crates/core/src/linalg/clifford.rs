use num_complex::Complex;
use num_traits::{One, Zero};

use super::matrix::{kron, Matrix};
use crate::scalar::Real;

/// Pauli matrices (σ₁, σ₂, σ₃).
pub fn pauli<T: Real>() -> [Matrix<T>; 3] {
    let (o, z, i) = (Complex::<T>::one(), Complex::<T>::zero(), Complex::new(T::zero(), T::one()));
    [
        Matrix::new(2, 2, vec![z, o, o, z]).expect("2x2"),
        Matrix::new(2, 2, vec![z, -i, i, z]).expect("2x2"),
        Matrix::new(2, 2, vec![o, z, z, -o]).expect("2x2"),
    ]
}

/// 2m+1 Hermitian, unitary, pairwise anticommuting matrices of size 2^m:
/// γ_{2j-1} = Z^{⊗(j-1)} ⊗ X ⊗ I…, γ_{2j} = Z^{⊗(j-1)} ⊗ Y ⊗ I…, γ_{2m+1} = Z^{⊗m}.
/// For m = 1 this is (σ₁, σ₂, σ₃).
pub fn clifford_generators<T: Real>(m: usize) -> Vec<Matrix<T>> {
    assert!(m >= 1, "clifford_generators needs m >= 1");
    let [x, y, z] = pauli::<T>();
    let id = Matrix::<T>::identity(2);
    let tensor_word = |letters: &[&Matrix<T>]| {
        let mut acc = letters[0].clone();
        for l in &letters[1..] {
            acc = kron(&acc, l);
        }
        acc
    };
    let mut out = Vec::with_capacity(2 * m + 1);
    for j in 0..m {
        for middle in [&x, &y] {
            let letters: Vec<&Matrix<T>> =
                (0..m).map(|k| if k < j { &z } else if k == j { middle } else { &id }).collect();
            out.push(tensor_word(&letters));
        }
    }
    let zs: Vec<&Matrix<T>> = (0..m).map(|_| &z).collect();
    out.push(tensor_word(&zs));
    out
}
