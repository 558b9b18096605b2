use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;

use crate::error::{dim_err, QmsError, Result};
use crate::linalg::random::complex_gaussian;
use crate::linalg::{kron, rank, Matrix};
use crate::tolerances::TOL;
use crate::{ComplexMatrix, C64};

/// Unital, adjoint-closed subspace of M_d(ℂ).
///
/// The working basis is Hermitian and Frobenius-orthonormal with I/√d first, so
/// coordinates are c_k = tr(h_k x) and the adjoint acts by conjugating coordinates.
#[derive(Clone, Debug)]
pub struct OperatorSystem {
    ambient_dim: usize,
    basis: Vec<ComplexMatrix>,
    original_basis: Vec<ComplexMatrix>,
    unit_coords: Vec<C64>,
}

/// Element of M_s(𝒳) as coordinates plus its realization in M_{s·d}(ℂ).
#[derive(Clone, Debug, PartialEq)]
pub struct AmplifiedElement {
    level: usize,
    dim: usize,
    coeffs: Vec<C64>,
    realization: ComplexMatrix,
}

/// Element of M_s(M_n(𝒳)): outer indices (i, j), inner indices (k, l), basis index c.
#[derive(Clone, Debug, PartialEq)]
pub struct NestedElement {
    outer: usize,
    inner: usize,
    dim: usize,
    coeffs: Vec<C64>,
    realization: ComplexMatrix,
}

impl AmplifiedElement {
    pub fn level(&self) -> usize {
        self.level
    }

    /// Dimension m of the underlying operator system.
    pub fn system_dim(&self) -> usize {
        self.dim
    }

    /// Coordinates indexed ((i·s + j)·m + k).
    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize, j: usize, k: usize) -> C64 {
        self.coeffs[(i * self.level + j) * self.dim + k]
    }

    pub fn realization(&self) -> &ComplexMatrix {
        &self.realization
    }

    pub fn norm(&self) -> f64 {
        crate::linalg::operator_norm(&self.realization)
    }
}

impl NestedElement {
    pub fn outer(&self) -> usize {
        self.outer
    }

    pub fn inner(&self) -> usize {
        self.inner
    }

    pub fn system_dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize, j: usize, k: usize, l: usize, c: usize) -> C64 {
        let (s, n) = (self.outer, self.inner);
        self.coeffs[(((i * s + j) * n + k) * n + l) * self.dim + c]
    }

    pub fn realization(&self) -> &ComplexMatrix {
        &self.realization
    }
}

impl OperatorSystem {
    /// Builds the operator system spanned by `generators`.
    ///
    /// Fails unless the generators are linearly independent, their span contains I_d
    /// and is closed under the adjoint.
    pub fn new(ambient_dim: usize, generators: Vec<ComplexMatrix>) -> Result<Self> {
        if generators.is_empty() {
            return Err(QmsError::InvalidOperatorSystem("no generators".into()));
        }
        let d = ambient_dim;
        if generators.iter().any(|g| g.rows() != d || g.cols() != d) {
            return dim_err(format!("generators must be {d}x{d}"));
        }
        let k = generators.len();
        let stacked = Matrix::from_fn(d * d, k, |r, c| generators[c].data()[r]);
        let complex_rank = rank(&stacked, TOL.rank_cutoff);
        if complex_rank < k {
            return Err(QmsError::InvalidOperatorSystem(format!(
                "generators are linearly dependent (rank {complex_rank} < {k})"
            )));
        }
        let mut herm = Vec::with_capacity(2 * k);
        for g in &generators {
            herm.push(g.hermitian_part());
            herm.push(g.scale(Complex::new(0.0, -1.0)).hermitian_part());
        }
        let unit = ComplexMatrix::identity(d).scale_real(1.0 / (d as f64).sqrt());
        let plain = orthonormalize_hermitian_plain(&herm);
        if plain.len() != complex_rank {
            return Err(QmsError::InvalidOperatorSystem(format!(
                "span is not adjoint-closed (real dimension {} of Hermitian parts vs complex dimension {complex_rank})",
                plain.len()
            )));
        }
        let unit_residual = residual_in_span(&plain, &unit);
        if unit_residual > TOL.hermitian {
            return Err(QmsError::InvalidOperatorSystem(format!("identity not in span (residual {unit_residual:.3e})")));
        }
        let basis = orthonormalize_hermitian(&unit, &herm);
        Ok(Self::assemble(d, basis, generators))
    }

    fn assemble(ambient_dim: usize, basis: Vec<ComplexMatrix>, original_basis: Vec<ComplexMatrix>) -> Self {
        let unit = ComplexMatrix::identity(ambient_dim);
        let unit_coords = basis.iter().map(|h| h.inner(&unit)).collect();
        Self { ambient_dim, basis, original_basis, unit_coords }
    }

    /// M_d(ℂ) with basis E_ii, (E_ij + E_ji)/√2, i(E_ij − E_ji)/√2 after the unit.
    pub fn full_matrix_algebra(d: usize) -> Self {
        let mut gens = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                gens.push(ComplexMatrix::unit(d, d, i, j));
            }
        }
        let mut herm = Vec::with_capacity(d * d);
        for i in 0..d {
            herm.push(ComplexMatrix::unit(d, d, i, i));
        }
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..d {
            for j in (i + 1)..d {
                let mut a = ComplexMatrix::zeros(d, d);
                a[(i, j)] = Complex::new(r, 0.0);
                a[(j, i)] = Complex::new(r, 0.0);
                herm.push(a);
                let mut b = ComplexMatrix::zeros(d, d);
                b[(i, j)] = Complex::new(0.0, r);
                b[(j, i)] = Complex::new(0.0, -r);
                herm.push(b);
            }
        }
        let unit = ComplexMatrix::identity(d).scale_real(1.0 / (d as f64).sqrt());
        let basis = orthonormalize_hermitian(&unit, &herm);
        Self::assemble(d, basis, gens)
    }

    /// Diagonal matrices in M_d(ℂ).
    pub fn diagonal(d: usize) -> Self {
        let gens: Vec<ComplexMatrix> = (0..d).map(|i| ComplexMatrix::unit(d, d, i, i)).collect();
        let unit = ComplexMatrix::identity(d).scale_real(1.0 / (d as f64).sqrt());
        let basis = orthonormalize_hermitian(&unit, &gens);
        Self::assemble(d, basis, gens)
    }

    /// Algebraic tensor product 𝒳 ⊗ 𝒴 ⊆ M_{dX·dY}; coordinate index i·m_Y + j.
    pub fn tensor(&self, other: &OperatorSystem) -> Self {
        let mut basis = Vec::with_capacity(self.dim() * other.dim());
        let mut orig = Vec::with_capacity(self.original_basis.len() * other.original_basis.len());
        for a in &self.basis {
            for b in &other.basis {
                basis.push(kron(a, b));
            }
        }
        for a in &self.original_basis {
            for b in &other.original_basis {
                orig.push(kron(a, b));
            }
        }
        Self::assemble(self.ambient_dim * other.ambient_dim, basis, orig)
    }

    /// M_n(𝒳) realized in M_{n·d}(ℂ).
    pub fn matrix_amplification(&self, n: usize) -> Self {
        let outer = OperatorSystem::full_matrix_algebra(n);
        outer.tensor(self)
    }

    /// System spanned by the images of the basis under a unital injective *-map.
    pub fn map_basis(&self, map: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Result<Self> {
        let gens: Vec<ComplexMatrix> = self.basis.iter().map(&map).collect();
        let d = gens[0].rows();
        Self::new(d, gens)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Dimension m of the system.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Hermitian orthonormal working basis; element 0 is I/√d.
    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn original_basis(&self) -> &[ComplexMatrix] {
        &self.original_basis
    }

    pub fn unit_coords(&self) -> &[C64] {
        &self.unit_coords
    }

    /// Coordinates of the orthogonal projection of x onto the span.
    pub fn coords(&self, x: &ComplexMatrix) -> Vec<C64> {
        self.basis.iter().map(|h| h.inner(x)).collect()
    }

    pub fn combine(&self, coeffs: &[C64]) -> ComplexMatrix {
        assert_eq!(coeffs.len(), self.dim(), "coordinate length");
        let d = self.ambient_dim;
        let mut out = ComplexMatrix::zeros(d, d);
        for (c, h) in coeffs.iter().zip(&self.basis) {
            if !c.is_zero() {
                out.axpy(*c, h);
            }
        }
        out
    }

    /// Frobenius distance of x from the span.
    pub fn residual(&self, x: &ComplexMatrix) -> f64 {
        (x - &self.combine(&self.coords(x))).frobenius_norm()
    }

    pub fn contains(&self, x: &ComplexMatrix) -> bool {
        self.residual(x) <= TOL.hermitian * (1.0 + x.frobenius_norm())
    }

    /// Builds an element of M_s(𝒳) from coordinates indexed ((i·s + j)·m + k).
    pub fn amplify(&self, s: usize, coeffs: Vec<C64>) -> Result<AmplifiedElement> {
        let m = self.dim();
        if s == 0 || coeffs.len() != s * s * m {
            return dim_err(format!("level {s} needs {} coordinates, got {}", s * s * m, coeffs.len()));
        }
        let realization = self.realize(s, &coeffs);
        Ok(AmplifiedElement { level: s, dim: m, coeffs, realization })
    }

    fn realize(&self, s: usize, coeffs: &[C64]) -> ComplexMatrix {
        let (m, d) = (self.dim(), self.ambient_dim);
        let mut r = ComplexMatrix::zeros(s * d, s * d);
        for i in 0..s {
            for j in 0..s {
                for k in 0..m {
                    let c = coeffs[(i * s + j) * m + k];
                    if !c.is_zero() {
                        r.add_to_block(i * d, j * d, c, &self.basis[k]);
                    }
                }
            }
        }
        r
    }

    /// Element of M_s(𝒳) from its realization; fails if a block leaves the span.
    pub fn amplify_matrix(&self, s: usize, realization: &ComplexMatrix) -> Result<AmplifiedElement> {
        let d = self.ambient_dim;
        if realization.rows() != s * d || realization.cols() != s * d {
            return dim_err(format!("expected {}x{} realization", s * d, s * d));
        }
        let m = self.dim();
        let mut coeffs = vec![C64::zero(); s * s * m];
        let mut worst = 0.0f64;
        for i in 0..s {
            for j in 0..s {
                let blk = realization.block(i * d, j * d, d, d);
                let c = self.coords(&blk);
                let res = (&blk - &self.combine(&c)).frobenius_norm();
                worst = worst.max(res / (1.0 + blk.frobenius_norm()));
                coeffs[(i * s + j) * m..(i * s + j + 1) * m].copy_from_slice(&c);
            }
        }
        if worst > TOL.hermitian {
            return Err(QmsError::NotInSystem { residual: worst });
        }
        self.amplify(s, coeffs)
    }

    /// v ⊗ I_d for a scalar matrix v ∈ M_s(ℂ).
    pub fn scalar(&self, v: &ComplexMatrix) -> AmplifiedElement {
        let s = v.rows();
        assert!(v.is_square(), "scalar matrix must be square");
        let m = self.dim();
        let mut coeffs = vec![C64::zero(); s * s * m];
        for i in 0..s {
            for j in 0..s {
                for k in 0..m {
                    coeffs[(i * s + j) * m + k] = v[(i, j)] * self.unit_coords[k];
                }
            }
        }
        self.amplify(s, coeffs).expect("scalar coordinates")
    }

    pub fn unit(&self, s: usize) -> AmplifiedElement {
        self.scalar(&ComplexMatrix::identity(s))
    }

    /// Random element with standard complex Gaussian coordinates.
    pub fn random_element(&self, s: usize, rng: &mut (impl Rng + ?Sized)) -> AmplifiedElement {
        let coeffs = (0..s * s * self.dim()).map(|_| complex_gaussian::<f64>(rng)).collect();
        self.amplify(s, coeffs).expect("random coordinates")
    }

    /// Random selfadjoint element of M_s(𝒳).
    pub fn random_hermitian_element(&self, s: usize, rng: &mut (impl Rng + ?Sized)) -> AmplifiedElement {
        let x = self.random_element(s, rng);
        let coeffs = x.coeffs.iter().zip(self.adjoint(&x).coeffs).map(|(a, b)| (a + b) * 0.5).collect();
        self.amplify(s, coeffs).expect("random coordinates")
    }

    /// x* as an element of M_s(𝒳): coefficient (i, j, k) becomes conj(c_{j,i,k}).
    pub fn adjoint(&self, x: &AmplifiedElement) -> AmplifiedElement {
        let (s, m) = (x.level, x.dim);
        let mut coeffs = vec![C64::zero(); s * s * m];
        for i in 0..s {
            for j in 0..s {
                for k in 0..m {
                    coeffs[(i * s + j) * m + k] = x.coeff(j, i, k).conj();
                }
            }
        }
        self.amplify(s, coeffs).expect("adjoint coordinates")
    }

    pub fn direct_sum(&self, x: &AmplifiedElement, y: &AmplifiedElement) -> AmplifiedElement {
        let (s, r, m) = (x.level, y.level, self.dim());
        let t = s + r;
        let mut coeffs = vec![C64::zero(); t * t * m];
        for i in 0..s {
            for j in 0..s {
                let dst = (i * t + j) * m;
                coeffs[dst..dst + m].copy_from_slice(&x.coeffs[(i * s + j) * m..(i * s + j + 1) * m]);
            }
        }
        for i in 0..r {
            for j in 0..r {
                let dst = ((s + i) * t + (s + j)) * m;
                coeffs[dst..dst + m].copy_from_slice(&y.coeffs[(i * r + j) * m..(i * r + j + 1) * m]);
            }
        }
        self.amplify(t, coeffs).expect("direct sum coordinates")
    }

    /// v · x · w for scalar matrices v (t×s) and w (s×t).
    pub fn bimodule(&self, v: &ComplexMatrix, x: &AmplifiedElement, w: &ComplexMatrix) -> Result<AmplifiedElement> {
        let (s, m) = (x.level, x.dim);
        if v.cols() != s || w.rows() != s || v.rows() != w.cols() {
            return dim_err("bimodule factors do not match the level");
        }
        let t = v.rows();
        let mut coeffs = vec![C64::zero(); t * t * m];
        for a in 0..t {
            for b in 0..t {
                for i in 0..s {
                    let vai = v[(a, i)];
                    if vai.is_zero() {
                        continue;
                    }
                    for j in 0..s {
                        let f = vai * w[(j, b)];
                        if f.is_zero() {
                            continue;
                        }
                        for k in 0..m {
                            coeffs[(a * t + b) * m + k] += f * x.coeff(i, j, k);
                        }
                    }
                }
            }
        }
        self.amplify(t, coeffs)
    }

    /// Entry x_ij as a level-1 element.
    pub fn entry(&self, x: &AmplifiedElement, i: usize, j: usize) -> AmplifiedElement {
        let m = x.dim;
        let s = x.level;
        self.amplify(1, x.coeffs[(i * s + j) * m..(i * s + j + 1) * m].to_vec()).expect("entry")
    }

    /// Linear combination a·x + b·y at equal level.
    pub fn lincomb(&self, a: C64, x: &AmplifiedElement, b: C64, y: &AmplifiedElement) -> AmplifiedElement {
        assert_eq!(x.level, y.level, "lincomb level");
        let coeffs = x.coeffs.iter().zip(&y.coeffs).map(|(p, q)| a * p + b * q).collect();
        self.amplify(x.level, coeffs).expect("lincomb")
    }

    /// Builds an element of M_s(M_n(𝒳)).
    pub fn nested(&self, s: usize, n: usize, coeffs: Vec<C64>) -> Result<NestedElement> {
        let m = self.dim();
        if s == 0 || n == 0 || coeffs.len() != s * s * n * n * m {
            return dim_err("nested coordinate length");
        }
        let d = self.ambient_dim;
        let mut r = ComplexMatrix::zeros(s * n * d, s * n * d);
        for i in 0..s {
            for j in 0..s {
                for k in 0..n {
                    for l in 0..n {
                        let base = (((i * s + j) * n + k) * n + l) * m;
                        let (r0, c0) = (i * n * d + k * d, j * n * d + l * d);
                        for c in 0..m {
                            let z = coeffs[base + c];
                            if !z.is_zero() {
                                r.add_to_block(r0, c0, z, &self.basis[c]);
                            }
                        }
                    }
                }
            }
        }
        Ok(NestedElement { outer: s, inner: n, dim: m, coeffs, realization: r })
    }

    /// I_s: M_s(M_n(𝒳)) → M_{s·n}(𝒳), I_s(x)_{i·n+k, j·n+l} = (x_ij)_kl.
    pub fn forget_subdivisions(&self, z: &NestedElement) -> Result<AmplifiedElement> {
        if z.dim != self.dim() {
            return dim_err("nested element belongs to a different system");
        }
        let (s, n, m) = (z.outer, z.inner, z.dim);
        let t = s * n;
        let mut coeffs = vec![C64::zero(); t * t * m];
        for i in 0..s {
            for j in 0..s {
                for k in 0..n {
                    for l in 0..n {
                        let src = (((i * s + j) * n + k) * n + l) * m;
                        let dst = ((i * n + k) * t + (j * n + l)) * m;
                        coeffs[dst..dst + m].copy_from_slice(&z.coeffs[src..src + m]);
                    }
                }
            }
        }
        self.amplify(t, coeffs)
    }

    /// Inverse of [`forget_subdivisions`](Self::forget_subdivisions).
    pub fn restore_subdivisions(&self, x: &AmplifiedElement, n: usize) -> Result<NestedElement> {
        if n == 0 || !x.level.is_multiple_of(n) {
            return dim_err(format!("level {} is not divisible by {n}", x.level));
        }
        let (t, m) = (x.level, x.dim);
        let s = t / n;
        let mut coeffs = vec![C64::zero(); t * t * m];
        for i in 0..s {
            for j in 0..s {
                for k in 0..n {
                    for l in 0..n {
                        let dst = (((i * s + j) * n + k) * n + l) * m;
                        let src = ((i * n + k) * t + (j * n + l)) * m;
                        coeffs[dst..dst + m].copy_from_slice(&x.coeffs[src..src + m]);
                    }
                }
            }
        }
        self.nested(s, n, coeffs)
    }
}

/// Real Gram-Schmidt (twice) on Hermitian matrices, starting from `first`.
fn orthonormalize_hermitian(first: &ComplexMatrix, candidates: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let mut basis = vec![first.clone()];
    extend_orthonormal(&mut basis, candidates);
    basis
}

fn orthonormalize_hermitian_plain(candidates: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let mut basis = Vec::new();
    extend_orthonormal(&mut basis, candidates);
    basis
}

fn extend_orthonormal(basis: &mut Vec<ComplexMatrix>, candidates: &[ComplexMatrix]) {
    for c in candidates {
        let orig = c.frobenius_norm();
        if orig == 0.0 {
            continue;
        }
        let mut v = c.clone();
        for _ in 0..2 {
            for b in basis.iter() {
                let dot = b.inner(&v).re;
                v.axpy(Complex::new(-dot, 0.0), b);
            }
        }
        let norm = v.frobenius_norm();
        if norm > TOL.rank_cutoff * orig.max(1.0) {
            basis.push(v.scale_real(1.0 / norm));
        }
    }
}

fn residual_in_span(basis: &[ComplexMatrix], x: &ComplexMatrix) -> f64 {
    let mut r = x.clone();
    for b in basis {
        let c = b.inner(&r);
        r.axpy(-c, b);
    }
    r.frobenius_norm()
}
