//! Seeded random matrices.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::Matrix;
use crate::scalar::Real;

pub fn gaussian<T: Real>(rng: &mut (impl Rng + ?Sized)) -> T {
    let x: f64 = rng.sample(StandardNormal);
    T::lit(x)
}

/// Standard complex Gaussian entry (E|z|² = 1).
pub fn complex_gaussian<T: Real>(rng: &mut (impl Rng + ?Sized)) -> Complex<T> {
    let h = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    Complex::new(gaussian::<T>(rng) * h, gaussian::<T>(rng) * h)
}

pub fn random_complex<T: Real>(rng: &mut (impl Rng + ?Sized), rows: usize, cols: usize) -> Matrix<T> {
    Matrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Hermitian matrix from the Gaussian unitary ensemble (unnormalized).
pub fn random_hermitian<T: Real>(rng: &mut (impl Rng + ?Sized), n: usize) -> Matrix<T> {
    random_complex::<T>(rng, n, n).hermitian_part()
}

/// Haar-distributed isometry d x n (n ≤ d): QR of a Gaussian matrix with phase correction.
pub fn haar_isometry<T: Real>(rng: &mut (impl Rng + ?Sized), d: usize, n: usize) -> Matrix<T> {
    assert!(n >= 1 && n <= d, "isometry needs 1 <= n <= d");
    loop {
        let g = random_complex::<T>(rng, d, n);
        if let Some(q) = gram_schmidt_columns(&g) {
            return q;
        }
    }
}

pub fn haar_unitary<T: Real>(rng: &mut (impl Rng + ?Sized), n: usize) -> Matrix<T> {
    haar_isometry(rng, n, n)
}

/// Orthonormalizes columns (twice-iterated Gram-Schmidt). The diagonal of the
/// implied R factor is positive, which makes the Q factor Haar for Gaussian input.
/// Returns `None` if the columns are numerically dependent.
pub fn gram_schmidt_columns<T: Real>(g: &Matrix<T>) -> Option<Matrix<T>> {
    let (d, n) = (g.rows(), g.cols());
    let mut cols: Vec<Vec<Complex<T>>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = g.col(j);
        let orig = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        for _ in 0..2 {
            for q in &cols {
                let dot: Complex<T> = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= *qi * dot;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if norm <= T::lit(1e-10) * orig.max(T::lit(1e-300)) || norm == T::zero() {
            return None;
        }
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    Some(Matrix::from_fn(d, n, |i, j| cols[j][i]))
}
