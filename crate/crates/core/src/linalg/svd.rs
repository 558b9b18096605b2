use num_complex::Complex;
use num_traits::Zero;

use super::matrix::Matrix;
use crate::scalar::Real;

const MAX_SWEEPS: usize = 80;

/// Singular values (descending) and right singular vectors (columns of `v`).
#[derive(Clone, Debug)]
pub struct RightSvd<T: Real> {
    pub singular_values: Vec<T>,
    pub v: Matrix<T>,
}

/// Householder triangularization; returns the square upper-triangular factor R (cols x cols).
fn householder_r<T: Real>(m: &Matrix<T>) -> Matrix<T> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.clone();
    for k in 0..cols.min(rows) {
        let norm = (k..rows).map(|i| a[(i, k)].norm_sqr()).sum::<T>().sqrt();
        if norm == T::zero() {
            continue;
        }
        let x0 = a[(k, k)];
        let phase = if x0.norm() > T::zero() { x0 / x0.norm() } else { Complex::new(T::one(), T::zero()) };
        let alpha = -phase * norm;
        let mut v: Vec<Complex<T>> = (k..rows).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if vn == T::zero() {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vn;
        }
        let two = T::lit(2.0);
        for j in k..cols {
            let dot: Complex<T> = v.iter().enumerate().map(|(t, vi)| vi.conj() * a[(k + t, j)]).sum();
            for (t, vi) in v.iter().enumerate() {
                let upd = *vi * dot * two;
                a[(k + t, j)] -= upd;
            }
        }
    }
    Matrix::from_fn(cols, cols, |i, j| if i < rows && j >= i { a[(i, j)] } else { Complex::zero() })
}

/// One-sided Jacobi SVD of a square matrix; returns column norms and accumulated rotations.
fn hestenes<T: Real>(mut a: Matrix<T>) -> RightSvd<T> {
    let n = a.cols();
    let rows = a.rows();
    let mut v = Matrix::<T>::identity(n);
    let eps = T::epsilon();
    let two = T::lit(2.0);
    for _ in 0..MAX_SWEEPS {
        let mut rotations = 0usize;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut alpha = T::zero();
                let mut beta = T::zero();
                let mut gamma = Complex::<T>::zero();
                for i in 0..rows {
                    let ap = a[(i, p)];
                    let aq = a[(i, q)];
                    alpha += ap.norm_sqr();
                    beta += aq.norm_sqr();
                    gamma += ap.conj() * aq;
                }
                let g = gamma.norm();
                if g == T::zero() || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotations += 1;
                let e = gamma / g;
                let tau = (beta - alpha) / (two * g);
                let t = if tau >= T::zero() {
                    T::one() / (tau + (T::one() + tau * tau).sqrt())
                } else {
                    -T::one() / (-tau + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                let se = e * s;
                let sec = e.conj() * s;
                for k in 0..rows {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - sec * akq;
                    a[(k, q)] = se * akp + akq * c;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - sec * vkq;
                    v[(k, q)] = se * vkp + vkq * c;
                }
            }
        }
        if rotations == 0 {
            break;
        }
    }
    let norms: Vec<T> = (0..n).map(|j| (0..rows).map(|i| a[(i, j)].norm_sqr()).sum::<T>().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));
    RightSvd {
        singular_values: order.iter().map(|&i| norms[i]).collect(),
        v: Matrix::from_fn(n, n, |i, j| v[(i, order[j])]),
    }
}

/// Singular values and right singular vectors of an arbitrary matrix.
pub fn right_svd<T: Real>(m: &Matrix<T>) -> RightSvd<T> {
    if m.rows() >= m.cols() {
        hestenes(householder_r(m))
    } else {
        // Pad with zero rows so the factorization sees a tall matrix.
        let mut tall = Matrix::zeros(m.cols(), m.cols());
        tall.set_block(0, 0, m);
        hestenes(householder_r(&tall))
    }
}

/// Orthonormal basis (columns) of the null space: right singular vectors with
/// σ ≤ cutoff · max(1, σ_max).
pub fn null_space<T: Real>(m: &Matrix<T>, cutoff: T) -> Vec<Vec<Complex<T>>> {
    let svd = right_svd(m);
    let smax = svd.singular_values.first().copied().unwrap_or(T::zero());
    let thr = cutoff * smax.max(T::one());
    (0..m.cols()).filter(|&j| svd.singular_values[j] <= thr).map(|j| svd.v.col(j)).collect()
}

/// Numerical rank with the same cutoff convention as [`null_space`].
pub fn rank<T: Real>(m: &Matrix<T>, cutoff: T) -> usize {
    m.cols() - null_space(m, cutoff).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigen::operator_norm;
    use crate::linalg::random::random_complex;
    use crate::rng::rng_from_seed;

    #[test]
    fn singular_values_match_norm() {
        let mut rng = rng_from_seed(21);
        for (r, c) in [(5, 5), (9, 4), (3, 6)] {
            let m = random_complex::<f64>(&mut rng, r, c);
            let svd = right_svd(&m);
            assert!((svd.singular_values[0] - operator_norm(&m)).abs() < 1e-10);
            let fro: f64 = svd.singular_values.iter().map(|s| s * s).sum();
            assert!((fro - m.frobenius_norm().powi(2)).abs() < 1e-9);
        }
    }

    #[test]
    fn null_space_of_rank_deficient_product() {
        let mut rng = rng_from_seed(22);
        let a = random_complex::<f64>(&mut rng, 8, 3);
        let b = random_complex::<f64>(&mut rng, 3, 6);
        let m = &a * &b;
        let ns = null_space(&m, 1e-8);
        assert_eq!(ns.len(), 3);
        for v in &ns {
            let mv = m.mat_vec(v);
            assert!(mv.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-10);
        }
        assert_eq!(rank(&m, 1e-8), 3);
    }

    #[test]
    fn zero_matrix_is_all_kernel() {
        let m = Matrix::<f64>::zeros(4, 3);
        assert_eq!(null_space(&m, 1e-8).len(), 3);
    }
}
