use num_complex::Complex;
use num_traits::{One, Zero};

use super::matrix::Matrix;
use crate::error::{QmsError, Result};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 80;

/// Eigen-decomposition of a Hermitian matrix: M = Q · diag(λ) · Q*.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T: Real> {
    /// Ascending eigenvalues.
    pub eigenvalues: Vec<T>,
    /// Unitary matrix whose columns are the eigenvectors.
    pub eigenvectors: Matrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    pub fn reconstruct(&self) -> Matrix<T> {
        let q = &self.eigenvectors;
        let n = q.rows();
        let scaled = Matrix::from_fn(n, n, |i, j| q[(i, j)] * self.eigenvalues[j]);
        &scaled * &q.adjoint()
    }

    pub fn max_abs_eigenvalue(&self) -> T {
        self.eigenvalues.iter().fold(T::zero(), |m, &l| m.max(l.abs()))
    }
}

/// Cyclic complex Jacobi diagonalization.
pub fn hermitian_eigen<T: Real>(m: &Matrix<T>) -> Result<HermitianEigen<T>> {
    if !m.is_square() {
        return Err(QmsError::DimensionMismatch(format!("eigen of {}x{} matrix", m.rows(), m.cols())));
    }
    let residual = m.hermitian_residual();
    if residual > T::hermitian_tol() * (T::one() + m.frobenius_norm()) {
        return Err(QmsError::NotHermitian { residual: residual.as_f64() });
    }
    Ok(jacobi(m.hermitian_part()))
}

/// Eigenvalues only.
pub fn hermitian_eigenvalues<T: Real>(m: &Matrix<T>) -> Result<Vec<T>> {
    hermitian_eigen(m).map(|e| e.eigenvalues)
}

fn jacobi<T: Real>(mut a: Matrix<T>) -> HermitianEigen<T> {
    let n = a.rows();
    let mut v = Matrix::<T>::identity(n);
    let eps = T::epsilon();
    let two = T::lit(2.0);
    for _ in 0..MAX_SWEEPS {
        let frob = a.frobenius_norm();
        if frob == T::zero() {
            break;
        }
        let floor = eps * T::lit(1e-2) * frob;
        let mut rotations = 0usize;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == T::zero() {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Entries below working precision are dropped (a backward-stable perturbation).
                if r <= floor || r <= eps * T::lit(0.5) * (app.abs() + aqq.abs()) {
                    a[(p, q)] = Complex::zero();
                    a[(q, p)] = Complex::zero();
                    continue;
                }
                rotations += 1;
                let e = apq / r;
                let tau = (aqq - app) / (two * r);
                let t = if tau >= T::zero() {
                    T::one() / (tau + (T::one() + tau * tau).sqrt())
                } else {
                    -T::one() / (-tau + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                let se = e * s;
                let sec = e.conj() * s;
                // A <- A G with G = [[c, s e], [-s conj(e), c]] on (p, q).
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - sec * akq;
                    a[(k, q)] = se * akp + akq * c;
                }
                // A <- G* A.
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - se * aqk;
                    a[(q, k)] = sec * apk + aqk * c;
                }
                a[(p, q)] = Complex::zero();
                a[(q, p)] = Complex::zero();
                a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
                a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());
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
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap_or(std::cmp::Ordering::Equal));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    HermitianEigen { eigenvalues, eigenvectors }
}

/// Largest singular value.
pub fn operator_norm<T: Real>(m: &Matrix<T>) -> T {
    if m.max_abs() == T::zero() {
        return T::zero();
    }
    if m.is_square() {
        let herm = m.hermitian_residual();
        let scale = T::lit(1e-13) * (T::one() + m.frobenius_norm());
        if herm <= scale {
            return jacobi(m.hermitian_part()).max_abs_eigenvalue();
        }
        // Skew-Hermitian input: i·M is Hermitian.
        let skew: T = {
            let n = m.rows();
            let mut acc = T::zero();
            for i in 0..n {
                for j in 0..n {
                    acc += (m[(i, j)] + m[(j, i)].conj()).norm_sqr();
                }
            }
            acc.sqrt()
        };
        if skew <= scale {
            let im = m.scale(Complex::new(T::zero(), T::one()));
            return jacobi(im.hermitian_part()).max_abs_eigenvalue();
        }
    }
    let gram = if m.rows() >= m.cols() { m.adjoint_mul(m) } else { m * &m.adjoint() };
    let top = jacobi(gram.hermitian_part()).eigenvalues.last().copied().unwrap_or(T::zero());
    top.max(T::zero()).sqrt()
}

/// Top singular triple (σ, u, w) with M w = σ u.
pub fn top_singular_triplet<T: Real>(m: &Matrix<T>) -> (T, Vec<Complex<T>>, Vec<Complex<T>>) {
    let normalize = |v: Vec<Complex<T>>| -> Vec<Complex<T>> {
        let n = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if n > T::zero() {
            v.into_iter().map(|z| z / n).collect()
        } else {
            v
        }
    };
    if m.is_square() && m.hermitian_residual() <= T::lit(1e-13) * (T::one() + m.frobenius_norm()) {
        let e = jacobi(m.hermitian_part());
        let n = m.rows();
        let (idx, lam) = if e.eigenvalues[0].abs() > e.eigenvalues[n - 1].abs() {
            (0, e.eigenvalues[0])
        } else {
            (n - 1, e.eigenvalues[n - 1])
        };
        let w = e.eigenvectors.col(idx);
        let sign = if lam < T::zero() { -T::one() } else { T::one() };
        let u = w.iter().map(|&z| z * sign).collect();
        return (lam.abs(), u, w);
    }
    let gram = m.adjoint_mul(m);
    let e = jacobi(gram.hermitian_part());
    let k = m.cols() - 1;
    let sigma = e.eigenvalues[k].max(T::zero()).sqrt();
    let w = e.eigenvectors.col(k);
    let mw = m.mat_vec(&w);
    let u = if sigma > T::zero() {
        normalize(mw)
    } else {
        let mut u = vec![Complex::zero(); m.rows()];
        u[0] = Complex::one();
        u
    };
    (sigma, u, w)
}

/// All singular triples (σ_i, u_i, w_i), σ descending; u_i is zero when σ_i vanishes.
pub fn singular_triplets<T: Real>(m: &Matrix<T>) -> Vec<(T, Vec<Complex<T>>, Vec<Complex<T>>)> {
    let gram = m.adjoint_mul(m);
    let e = jacobi(gram.hermitian_part());
    let mut out = Vec::with_capacity(m.cols());
    for k in (0..m.cols()).rev() {
        let sigma = e.eigenvalues[k].max(T::zero()).sqrt();
        let w = e.eigenvectors.col(k);
        let mw = m.mat_vec(&w);
        let u = if sigma > T::zero() { mw.into_iter().map(|z| z / sigma).collect() } else { vec![Complex::zero(); m.rows()] };
        out.push((sigma, u, w));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_complex, random_hermitian};
    use crate::rng::rng_from_seed;

    type M = Matrix<f64>;

    fn power_iteration_norm(m: &M, steps: usize) -> f64 {
        let g = m.adjoint_mul(m);
        let n = g.rows();
        let mut v: Vec<Complex<f64>> = (0..n).map(|i| Complex::new(1.0 + i as f64 * 0.1, 0.3)).collect();
        let mut lam = 0.0;
        for _ in 0..steps {
            let w = g.mat_vec(&v);
            let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            lam = norm / v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v = w.into_iter().map(|z| z / norm).collect();
        }
        lam.sqrt()
    }

    #[test]
    fn diagonal_input() {
        let e = hermitian_eigen(&M::from_real_diag(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 2.0, 3.0]);
        assert!(e.eigenvectors.max_abs_diff(&M::identity(3)) < 1e-15);
    }

    #[test]
    fn pauli_x() {
        let x = M::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let e = hermitian_eigen(&x).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14 && (e.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = M::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(hermitian_eigen(&m), Err(QmsError::NotHermitian { .. })));
    }

    #[test]
    fn random_hermitian_invariants() {
        let mut rng = rng_from_seed(11);
        for n in [1, 2, 5, 8, 17] {
            let h = random_hermitian::<f64>(&mut rng, n);
            let e = hermitian_eigen(&h).unwrap();
            let scale = 1.0 + h.frobenius_norm();
            assert!((&h - &e.reconstruct()).frobenius_norm() <= 1e-10 * scale);
            let qtq = e.eigenvectors.adjoint_mul(&e.eigenvectors);
            assert!(qtq.max_abs_diff(&M::identity(n)) <= 1e-10);
            let trace: f64 = e.eigenvalues.iter().sum();
            assert!((trace - h.trace().re).abs() <= 1e-9);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn degenerate_spectrum() {
        let mut rng = rng_from_seed(12);
        let u = crate::linalg::random::haar_unitary::<f64>(&mut rng, 6);
        let d = M::from_real_diag(&[1.0, 1.0, 1.0, -2.0, -2.0, 5.0]);
        let h = &(&u * &d) * &u.adjoint();
        let e = hermitian_eigen(&h).unwrap();
        let expect = [-2.0, -2.0, 1.0, 1.0, 1.0, 5.0];
        for (a, b) in e.eigenvalues.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn operator_norm_examples() {
        assert_eq!(operator_norm(&M::identity(4)), 1.0);
        assert!((operator_norm(&M::from_real_diag(&[3.0, -5.0])) - 5.0).abs() < 1e-14);
        assert_eq!(operator_norm(&M::zeros(3, 3)), 0.0);
        let mut rng = rng_from_seed(13);
        let m = random_complex::<f64>(&mut rng, 6, 6);
        assert!((operator_norm(&m) - power_iteration_norm(&m, 10_000)).abs() < 1e-9);
        let rect = random_complex::<f64>(&mut rng, 3, 7);
        assert!((operator_norm(&rect) - power_iteration_norm(&rect, 10_000)).abs() < 1e-9);
    }

    #[test]
    fn skew_hermitian_norm() {
        let mut rng = rng_from_seed(14);
        let h = random_hermitian::<f64>(&mut rng, 5);
        let k = h.scale(Complex::new(0.0, 1.0));
        assert!((operator_norm(&k) - operator_norm(&h)).abs() < 1e-12);
    }

    #[test]
    fn triplet_consistency() {
        let mut rng = rng_from_seed(15);
        for m in [random_complex::<f64>(&mut rng, 5, 5), random_hermitian::<f64>(&mut rng, 4)] {
            let (s, u, w) = top_singular_triplet(&m);
            let mw = m.mat_vec(&w);
            for (a, b) in mw.iter().zip(&u) {
                assert!((a - b * s).norm() < 1e-10);
            }
            assert!((s - operator_norm(&m)).abs() < 1e-10);
        }
    }

    #[test]
    fn single_precision_works() {
        let mut rng = rng_from_seed(16);
        let h = random_hermitian::<f32>(&mut rng, 6);
        let e = hermitian_eigen(&h).unwrap();
        assert!((&h - &e.reconstruct()).frobenius_norm() <= 1e-4 * (1.0 + h.frobenius_norm()));
    }
}
