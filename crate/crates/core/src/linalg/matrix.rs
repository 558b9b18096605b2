use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{dim_err, QmsError, Result};
use crate::scalar::Real;

/// Dense complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return dim_err(format!("matrix must be nonempty, got {rows}x{cols}"));
        }
        if data.len() != rows * cols {
            return dim_err(format!("{rows}x{cols} matrix needs {} entries, got {}", rows * cols, data.len()));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds from nested rows of entries.
    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return dim_err("ragged rows");
        }
        Self::new(r, c, rows.concat())
    }

    /// Builds from real entries given as nested rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let nested: Vec<Vec<Complex<T>>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| Complex::new(T::lit(x), T::zero())).collect())
            .collect();
        Self::from_rows(&nested)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix must be nonempty");
        Self { rows, cols, data: vec![Complex::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_diag(diag: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[T]) -> Self {
        let c: Vec<Complex<T>> = diag.iter().map(|&x| Complex::new(x, T::zero())).collect();
        Self::from_diag(&c)
    }

    /// Matrix unit E_ij of the given size.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m[(i, j)] = Complex::one();
        m
    }

    /// Column vector.
    pub fn column(v: &[Complex<T>]) -> Self {
        Self { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex<T>> {
        self.data
    }

    pub fn col(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * c).collect() }
    }

    pub fn scale_real(&self, c: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * c).collect() }
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: Complex<T>, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "axpy shape");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    /// Checked product.
    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return dim_err(format!("{}x{} times {}x{}", self.rows, self.cols, rhs.rows, rhs.cols));
        }
        let (n, k, m) = (self.rows, self.cols, rhs.cols);
        let mut out = vec![Complex::zero(); n * m];
        for i in 0..n {
            let row = &mut out[i * m..(i + 1) * m];
            for p in 0..k {
                let a = self.data[i * k + p];
                if a.is_zero() {
                    continue;
                }
                let rrow = &rhs.data[p * m..(p + 1) * m];
                for (o, &b) in row.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        Ok(Self { rows: n, cols: m, data: out })
    }

    /// `self* · rhs` without forming the adjoint.
    pub fn adjoint_mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.rows, rhs.rows, "adjoint_mul shape");
        let (k, n, m) = (self.rows, self.cols, rhs.cols);
        let mut out = vec![Complex::zero(); n * m];
        for p in 0..k {
            let rrow = &rhs.data[p * m..(p + 1) * m];
            for i in 0..n {
                let a = self.data[p * n + i].conj();
                if a.is_zero() {
                    continue;
                }
                let row = &mut out[i * m..(i + 1) * m];
                for (o, &b) in row.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        Self { rows: n, cols: m, data: out }
    }

    pub fn mat_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.cols, v.len(), "mat_vec shape");
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    /// Frobenius inner product tr(self* · other).
    pub fn inner(&self, other: &Self) -> Complex<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "inner shape");
        self.data.iter().zip(&other.data).map(|(a, &b)| a.conj() * b).sum()
    }

    /// ‖M − M*‖_F (infinite for non-square input).
    pub fn hermitian_residual(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let n = self.rows;
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                acc += (self.data[i * n + j] - self.data[j * n + i].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermitian_residual() <= tol * (T::one() + self.frobenius_norm())
    }

    /// (M + M*)/2.
    pub fn hermitian_part(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * half)
    }

    /// Maximum entrywise distance.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "max_abs_diff shape");
        self.data.iter().zip(&other.data).map(|(&a, &b)| (a - b).norm()).fold(T::zero(), T::max)
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols, "block out of range");
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        assert!(r0 + b.rows <= self.rows && c0 + b.cols <= self.cols, "block out of range");
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    pub fn add_to_block(&mut self, r0: usize, c0: usize, c: Complex<T>, b: &Self) {
        assert!(r0 + b.rows <= self.rows && c0 + b.cols <= self.cols, "block out of range");
        for i in 0..b.rows {
            let dst = (r0 + i) * self.cols + c0;
            for j in 0..b.cols {
                self.data[dst + j] += c * b.data[i * b.cols + j];
            }
        }
    }

    /// Converts to another precision.
    pub fn cast<U: Real>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| Complex::new(U::lit(z.re.as_f64()), U::lit(z.im.as_f64()))).collect(),
        }
    }
}

impl<T: Real> Index<(usize, usize)> for Matrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<'a, T: Real> Mul<&'a Matrix<T>> for &'a Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &'a Matrix<T>) -> Matrix<T> {
        self.try_mul(rhs).expect("matrix product shape")
    }
}

impl<'a, T: Real> Add<&'a Matrix<T>> for &'a Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: &'a Matrix<T>) -> Matrix<T> {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<'a, T: Real> Sub<&'a Matrix<T>> for &'a Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: &'a Matrix<T>) -> Matrix<T> {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl<T: Real> AddAssign<&Matrix<T>> for Matrix<T> {
    fn add_assign(&mut self, rhs: &Matrix<T>) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sum shape");
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl<T: Real> SubAssign<&Matrix<T>> for Matrix<T> {
    fn sub_assign(&mut self, rhs: &Matrix<T>) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "difference shape");
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl<T: Real> Neg for &Matrix<T> {
    type Output = Matrix<T>;
    fn neg(self) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| -z).collect() }
    }
}

/// Kronecker product A ⊗ B.
pub fn kron<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let (ar, ac, br, bc) = (a.rows, a.cols, b.rows, b.cols);
    let mut out = Matrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let x = a.data[i * ac + j];
            if x.is_zero() {
                continue;
            }
            out.add_to_block(i * br, j * bc, x, b);
        }
    }
    out
}

/// Block diagonal A ⊕ B.
pub fn direct_sum<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    block_diag(&[a, b])
}

pub fn block_diag<T: Real>(blocks: &[&Matrix<T>]) -> Matrix<T> {
    let rows = blocks.iter().map(|b| b.rows).sum();
    let cols = blocks.iter().map(|b| b.cols).sum();
    let mut out = Matrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.set_block(r, c, b);
        r += b.rows;
        c += b.cols;
    }
    out
}

/// A B − B A for square matrices of equal size.
pub fn commutator<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if !a.is_square() || !b.is_square() || a.rows != b.rows {
        return Err(QmsError::DimensionMismatch(format!(
            "commutator needs equal square matrices, got {}x{} and {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(&(a * b) - &(b * a))
}

/// A B + B A for square matrices of equal size.
pub fn anticommutator<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if !a.is_square() || !b.is_square() || a.rows != b.rows {
        return dim_err("anticommutator needs equal square matrices");
    }
    Ok(&(a * b) + &(b * a))
}

/// (I_s ⊗ a) · x · (I_s ⊗ b) without forming the Kronecker factors.
pub fn block_sandwich<T: Real>(a: &Matrix<T>, x: &Matrix<T>, b: &Matrix<T>, s: usize) -> Matrix<T> {
    let d = a.rows;
    assert!(a.is_square() && b.is_square() && b.rows == d, "block_sandwich factors");
    assert!(x.rows == s * d && x.cols == s * d, "block_sandwich argument");
    block_left(a, &block_right(x, b, s), s)
}

/// (I_s ⊗ a) · x.
pub fn block_left<T: Real>(a: &Matrix<T>, x: &Matrix<T>, s: usize) -> Matrix<T> {
    let d = a.rows;
    assert!(x.rows == s * d, "block_left shape");
    let n = x.cols;
    let mut out = Matrix::zeros(x.rows, n);
    for blk in 0..s {
        for r in 0..d {
            let dst = (blk * d + r) * n;
            for e in 0..d {
                let c = a.data[r * d + e];
                if c.is_zero() {
                    continue;
                }
                let src = (blk * d + e) * n;
                for col in 0..n {
                    out.data[dst + col] += c * x.data[src + col];
                }
            }
        }
    }
    out
}

/// x · (I_s ⊗ b).
pub fn block_right<T: Real>(x: &Matrix<T>, b: &Matrix<T>, s: usize) -> Matrix<T> {
    let d = b.rows;
    assert!(x.cols == s * d, "block_right shape");
    let n = x.cols;
    let mut out = Matrix::zeros(x.rows, n);
    for row in 0..x.rows {
        for blk in 0..s {
            for e in 0..d {
                let v = x.data[row * n + blk * d + e];
                if v.is_zero() {
                    continue;
                }
                let brow = &b.data[e * d..(e + 1) * d];
                let dst = &mut out.data[row * n + blk * d..row * n + (blk + 1) * d];
                for (o, &bb) in dst.iter_mut().zip(brow) {
                    *o += v * bb;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::random_complex;
    use crate::rng::rng_from_seed;

    type M = Matrix<f64>;

    #[test]
    fn construction_checks_shape() {
        assert!(M::new(2, 2, vec![Complex::zero(); 3]).is_err());
        assert!(M::new(0, 2, vec![]).is_err());
        let m = M::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        assert_eq!(m[(1, 0)].re, 3.0);
    }

    #[test]
    fn kron_identities() {
        assert_eq!(kron(&M::identity(2), &M::identity(3)), M::identity(6));
        let mut rng = rng_from_seed(1);
        let (a, b, c, d) = (
            random_complex::<f64>(&mut rng, 2, 2),
            random_complex::<f64>(&mut rng, 3, 3),
            random_complex::<f64>(&mut rng, 2, 2),
            random_complex::<f64>(&mut rng, 3, 3),
        );
        let lhs = &kron(&a, &b) * &kron(&c, &d);
        let rhs = kron(&(&a * &c), &(&b * &d));
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn commutator_with_identity_vanishes() {
        let mut rng = rng_from_seed(2);
        let d = random_complex::<f64>(&mut rng, 4, 4);
        assert!(commutator(&d, &M::identity(4)).unwrap().max_abs() < 1e-14);
        assert!(commutator(&d, &M::identity(3)).is_err());
    }

    #[test]
    fn sandwich_matches_kron() {
        let mut rng = rng_from_seed(3);
        let a = random_complex::<f64>(&mut rng, 3, 3);
        let b = random_complex::<f64>(&mut rng, 3, 3);
        let x = random_complex::<f64>(&mut rng, 6, 6);
        let i2 = M::identity(2);
        let direct = &(&kron(&i2, &a) * &x) * &kron(&i2, &b);
        assert!(block_sandwich(&a, &x, &b, 2).max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn adjoint_mul_matches() {
        let mut rng = rng_from_seed(4);
        let a = random_complex::<f64>(&mut rng, 4, 3);
        let b = random_complex::<f64>(&mut rng, 4, 2);
        assert!(a.adjoint_mul(&b).max_abs_diff(&(&a.adjoint() * &b)) < 1e-13);
    }
}
