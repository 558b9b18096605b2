//! Unital completely positive maps in Stinespring form φ(b) = W*(b ⊗ I_k)W.

use num_complex::Complex;
use num_traits::Zero;
use rand::Rng as _;

use super::system::{AmplifiedElement, NestedElement, OperatorSystem};
use crate::error::{dim_err, QmsError, Result};
use crate::linalg::random::haar_isometry;
use crate::rng::child_rng;
use crate::tolerances::TOL;
use crate::{ComplexMatrix, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct UcpMap {
    input_dim: usize,
    multiplicity: usize,
    stinespring: ComplexMatrix,
}

impl UcpMap {
    /// Compression b ↦ V* b V; requires V*V = I_n.
    pub fn compression(v: ComplexMatrix) -> Result<Self> {
        Self::stinespring(v.rows(), 1, v)
    }

    /// φ(b) = W*(b ⊗ I_k)W with W: ℂⁿ → ℂᵈ ⊗ ℂᵏ an isometry.
    pub fn stinespring(input_dim: usize, multiplicity: usize, w: ComplexMatrix) -> Result<Self> {
        if w.rows() != input_dim * multiplicity {
            return dim_err(format!("Stinespring isometry must have {} rows", input_dim * multiplicity));
        }
        let gram = w.adjoint_mul(&w);
        let err = gram.max_abs_diff(&ComplexMatrix::identity(w.cols()));
        if err > TOL.hermitian {
            return Err(QmsError::InvalidArgument(format!("W is not an isometry (error {err:.3e})")));
        }
        Ok(Self { input_dim, multiplicity, stinespring: w })
    }

    pub fn identity(d: usize) -> Self {
        Self { input_dim: d, multiplicity: 1, stinespring: ComplexMatrix::identity(d) }
    }

    /// Vector state b ↦ ⟨ξ, bξ⟩ for a unit vector ξ.
    pub fn vector_state(xi: &[C64]) -> Result<Self> {
        Self::compression(ComplexMatrix::column(xi))
    }

    /// Vector state of the i-th standard basis vector.
    pub fn basis_state(d: usize, i: usize) -> Self {
        let mut v = vec![C64::zero(); d];
        v[i] = Complex::new(1.0, 0.0);
        Self::vector_state(&v).expect("unit vector")
    }

    /// Block-diagonal direct sum φ ⊕ ψ.
    pub fn direct_sum(&self, other: &UcpMap) -> Result<Self> {
        if self.input_dim != other.input_dim {
            return dim_err("direct sum of maps on different algebras");
        }
        let d = self.input_dim;
        let (k1, k2) = (self.multiplicity, other.multiplicity);
        let (n1, n2) = (self.target_dim(), other.target_dim());
        let k = k1 + k2;
        let mut w = ComplexMatrix::zeros(d * k, n1 + n2);
        for i in 0..d {
            for t in 0..k1 {
                for c in 0..n1 {
                    w[(i * k + t, c)] = self.stinespring[(i * k1 + t, c)];
                }
            }
            for t in 0..k2 {
                for c in 0..n2 {
                    w[(i * k + k1 + t, n1 + c)] = other.stinespring[(i * k2 + t, c)];
                }
            }
        }
        Self::stinespring(d, k, w)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn target_dim(&self) -> usize {
        self.stinespring.cols()
    }

    pub fn apply(&self, b: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(b.rows(), self.input_dim, "ucp input size");
        let (d, k, w) = (self.input_dim, self.multiplicity, &self.stinespring);
        if k == 1 {
            return w.adjoint_mul(&(b * w));
        }
        let n = w.cols();
        let mut bw = ComplexMatrix::zeros(d * k, n);
        for i in 0..d {
            for j in 0..d {
                let c = b[(i, j)];
                if c.is_zero() {
                    continue;
                }
                for t in 0..k {
                    for col in 0..n {
                        let v = w[(j * k + t, col)];
                        bw[(i * k + t, col)] += c * v;
                    }
                }
            }
        }
        w.adjoint_mul(&bw)
    }

    /// φ_s applied blockwise to a realization in M_s(M_d).
    pub fn apply_amplified(&self, z: &ComplexMatrix, s: usize) -> ComplexMatrix {
        let (d, n) = (self.input_dim, self.target_dim());
        assert_eq!(z.rows(), s * d, "ucp amplified input size");
        let mut out = ComplexMatrix::zeros(s * n, s * n);
        for i in 0..s {
            for j in 0..s {
                out.set_block(i * n, j * n, &self.apply(&z.block(i * d, j * d, d, d)));
            }
        }
        out
    }

    /// Images of the working basis of `x`.
    pub fn values(&self, x: &OperatorSystem) -> Vec<ComplexMatrix> {
        x.basis().iter().map(|h| self.apply(h)).collect()
    }

    /// Deviation ‖φ(I) − I_n‖_max.
    pub fn unitality_error(&self) -> f64 {
        self.apply(&ComplexMatrix::identity(self.input_dim)).max_abs_diff(&ComplexMatrix::identity(self.target_dim()))
    }
}

/// Haar-random UCP map into M_n; n > d uses direct sums of compressions.
pub fn sample_ucp(x: &OperatorSystem, n: usize, seed: u64) -> UcpMap {
    let d = x.ambient_dim();
    assert!(n >= 1, "target dimension must be positive");
    let mut rng = child_rng(seed, n as u64);
    let mut remaining = n;
    let mut acc: Option<UcpMap> = None;
    while remaining > 0 {
        let chunk = remaining.min(d);
        let map = UcpMap::compression(haar_isometry::<f64>(&mut rng, d, chunk)).expect("isometry");
        acc = Some(match acc {
            None => map,
            Some(prev) => prev.direct_sum(&map).expect("same input"),
        });
        remaining -= chunk;
    }
    acc.expect("n >= 1")
}

/// Deterministic sequence of UCP maps on M_d: the identity representation, the vector
/// states of the standard frame, then Haar compressions of seeded random size.
/// Item i depends only on (d, seed, i), so sample sets are nested in the budget.
#[derive(Clone, Copy, Debug)]
pub struct UcpSampler {
    pub dim: usize,
    pub seed: u64,
}

impl UcpSampler {
    pub fn new(dim: usize, seed: u64) -> Self {
        Self { dim, seed }
    }

    pub fn map(&self, index: usize) -> UcpMap {
        let d = self.dim;
        if index == 0 {
            return UcpMap::identity(d);
        }
        if index <= d {
            return UcpMap::basis_state(d, index - 1);
        }
        let mut rng = child_rng(self.seed, index as u64);
        let n = rng.random_range(1..=d);
        UcpMap::compression(haar_isometry::<f64>(&mut rng, d, n)).expect("isometry")
    }

    pub fn take(&self, count: usize) -> Vec<UcpMap> {
        (0..count).map(|i| self.map(i)).collect()
    }
}

/// (1 ⊗ φ)_s(z) ∈ M_s(M_n(𝒳)) for z ∈ M_s(𝒳 ⊗ 𝒴) in tensor coordinates.
pub fn apply_ucp_right(
    xs: &OperatorSystem,
    ys: &OperatorSystem,
    z: &AmplifiedElement,
    phi: &UcpMap,
) -> Result<NestedElement> {
    let (mx, my) = (xs.dim(), ys.dim());
    if z.system_dim() != mx * my || phi.input_dim() != ys.ambient_dim() {
        return dim_err("apply_ucp_right: element or map does not match the tensor system");
    }
    let (s, n) = (z.level(), phi.target_dim());
    let vals = phi.values(ys);
    let mut coeffs = vec![C64::zero(); s * s * n * n * mx];
    for i in 0..s {
        for j in 0..s {
            for c in 0..mx {
                for (k, val) in vals.iter().enumerate() {
                    let zc = z.coeff(i, j, c * my + k);
                    if zc.is_zero() {
                        continue;
                    }
                    for a in 0..n {
                        for b in 0..n {
                            coeffs[((((i * s + j) * n + a) * n + b) * mx) + c] += zc * val[(a, b)];
                        }
                    }
                }
            }
        }
    }
    xs.nested(s, n, coeffs)
}

/// (ψ ⊗ 1)_s(z) ∈ M_s(M_n(𝒴)).
pub fn apply_ucp_left(
    xs: &OperatorSystem,
    ys: &OperatorSystem,
    z: &AmplifiedElement,
    psi: &UcpMap,
) -> Result<NestedElement> {
    let (mx, my) = (xs.dim(), ys.dim());
    if z.system_dim() != mx * my || psi.input_dim() != xs.ambient_dim() {
        return dim_err("apply_ucp_left: element or map does not match the tensor system");
    }
    let (s, n) = (z.level(), psi.target_dim());
    let vals = psi.values(xs);
    let mut coeffs = vec![C64::zero(); s * s * n * n * my];
    for i in 0..s {
        for j in 0..s {
            for (c, val) in vals.iter().enumerate() {
                for k in 0..my {
                    let zc = z.coeff(i, j, c * my + k);
                    if zc.is_zero() {
                        continue;
                    }
                    for a in 0..n {
                        for b in 0..n {
                            coeffs[((((i * s + j) * n + a) * n + b) * my) + k] += zc * val[(a, b)];
                        }
                    }
                }
            }
        }
    }
    ys.nested(s, n, coeffs)
}
