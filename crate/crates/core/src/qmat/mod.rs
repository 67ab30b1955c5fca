//! Dense complex linear algebra.
//!
//! [`CMatrix`] is a row-major complex matrix. Everything here is a pure
//! function of its inputs.

mod eig;

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
// only needed when std is absent from the build
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

pub use eig::{eig_hermitian, HermitianEigen};


pub type C64 = Complex<f64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QmatError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
}

/// Which factor of a bipartite system to trace out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, QmatError> {
        if data.len() != rows * cols {
            return Err(QmatError::DimensionMismatch { expected: rows * cols, got: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self, QmatError> {
        Self::from_vec(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// `|a⟩⟨b|`.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        Self::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
    }

    /// `|i⟩⟨j|` in dimension `n`.
    pub fn basis_op(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = ONE;
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_c(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// `self += s · other`.
    pub fn add_scaled(&mut self, s: f64, other: &CMatrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "add_scaled shape");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest elementwise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "max_abs_diff shape");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Largest elementwise deviation from `A = A†`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// `Tr[A† B]`, the Frobenius inner product.
    pub fn inner(&self, other: &CMatrix) -> C64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "inner shape");
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    /// `Tr[A B]` without forming the product.
    pub fn trace_of_product(&self, other: &CMatrix) -> C64 {
        assert_eq!(self.cols, other.rows, "trace_of_product shape");
        assert_eq!(self.rows, other.cols, "trace_of_product shape");
        let mut acc = ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    pub fn matmul(&self, other: &CMatrix) -> Self {
        assert_eq!(self.cols, other.rows, "matmul inner dimension");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matvec dimension");
        (0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// `⟨v|A|v⟩`.
    pub fn expectation(&self, v: &[C64]) -> C64 {
        let av = self.matvec(v);
        v.iter().zip(&av).map(|(a, b)| a.conj() * b).sum()
    }

    /// `U A U†`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        u.matmul(self).matmul(&u.dagger())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add shape");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub shape");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

/// Kronecker product `a ⊗ b` (big-endian: `a` indexes the high factor).
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (br, bc) = (b.rows, b.cols);
    let mut out = CMatrix::zeros(a.rows * br, a.cols * bc);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of state vectors.
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

/// Traces out one factor of a `(d1·d2)×(d1·d2)` operator.
///
/// Tracing [`Subsystem::First`] leaves a `d2×d2` matrix, tracing
/// [`Subsystem::Second`] leaves `d1×d1`.
pub fn partial_trace(m: &CMatrix, dims: (usize, usize), which: Subsystem) -> Result<CMatrix, QmatError> {
    let (d1, d2) = dims;
    let n = d1 * d2;
    if m.rows != n || m.cols != n {
        return Err(QmatError::DimensionMismatch { expected: n, got: m.rows.max(m.cols) });
    }
    Ok(match which {
        Subsystem::First => CMatrix::from_fn(d2, d2, |a, b| (0..d1).map(|i| m[(i * d2 + a, i * d2 + b)]).sum()),
        Subsystem::Second => CMatrix::from_fn(d1, d1, |i, j| (0..d2).map(|a| m[(i * d2 + a, j * d2 + a)]).sum()),
    })
}

fn require_hermitian(m: &CMatrix, tol: f64) -> Result<(), QmatError> {
    if !m.is_square() {
        return Err(QmatError::NotSquare { rows: m.rows, cols: m.cols });
    }
    let deviation = m.hermitian_deviation();
    if deviation > tol {
        return Err(QmatError::NotHermitian { deviation });
    }
    Ok(())
}

/// `½ Σ |λ_i(σ − ρ)|`.
pub fn trace_distance(rho: &CMatrix, sigma: &CMatrix) -> Result<f64, QmatError> {
    if (rho.rows, rho.cols) != (sigma.rows, sigma.cols) {
        return Err(QmatError::DimensionMismatch { expected: rho.rows, got: sigma.rows });
    }
    let diff = sigma - rho;
    let eig = eig_hermitian(&diff)?;
    Ok(0.5 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
}

/// Nearest positive semidefinite matrix in Frobenius norm (negative
/// eigenvalues clipped to zero).
pub fn project_psd(m: &CMatrix) -> Result<CMatrix, QmatError> {
    let eig = eig_hermitian(m)?;
    Ok(eig.reconstruct_with(|l| l.max(0.0)))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> Result<f64, QmatError> {
    Ok(eig_hermitian(m)?.eigenvalues.first().copied().unwrap_or(0.0))
}

/// Largest singular value of a Hermitian matrix.
pub fn operator_norm_hermitian(m: &CMatrix) -> Result<f64, QmatError> {
    Ok(eig_hermitian(m)?.eigenvalues.iter().fold(0.0f64, |acc, l| acc.max(l.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn kron_identity() {
        assert_eq!(kron(&CMatrix::identity(2), &CMatrix::identity(2)), CMatrix::identity(4));
    }

    #[test]
    fn kron_basis_projector_is_big_endian() {
        let p0 = CMatrix::basis_op(2, 0, 0);
        let p1 = CMatrix::basis_op(2, 1, 1);
        let k = kron(&p0, &p1);
        for i in 0..4 {
            for j in 0..4 {
                let expected = if (i, j) == (1, 1) { ONE } else { ZERO };
                assert_eq!(k[(i, j)], expected);
            }
        }
    }

    #[test]
    fn kron_trace_factorizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = random::ginibre(&mut rng, 3, 3);
            let b = random::ginibre(&mut rng, 2, 2);
            // direct oracle: sum of diagonal products
            let mut ta = ZERO;
            let mut tb = ZERO;
            for i in 0..3 {
                ta += a.as_slice()[i * 3 + i];
            }
            for i in 0..2 {
                tb += b.as_slice()[i * 2 + i];
            }
            assert!((kron(&a, &b).trace() - ta * tb).norm() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random::ginibre(&mut rng, 2, 2);
        let b = random::ginibre(&mut rng, 3, 3);
        let ab = kron(&a, &b);
        let second = partial_trace(&ab, (2, 3), Subsystem::Second).unwrap();
        assert!(second.max_abs_diff(&a.scale_c(b.trace())) < 1e-12);
        let first = partial_trace(&ab, (2, 3), Subsystem::First).unwrap();
        assert!(first.max_abs_diff(&b.scale_c(a.trace())) < 1e-12);
    }

    #[test]
    fn partial_trace_bell_state() {
        let s = 0.5f64.sqrt();
        let phi = [c(s), ZERO, ZERO, c(s)];
        let m = CMatrix::outer(&phi, &phi);
        let half = CMatrix::identity(2).scale(0.5);
        for which in [Subsystem::First, Subsystem::Second] {
            assert!(partial_trace(&m, (2, 2), which).unwrap().max_abs_diff(&half) < 1e-12);
        }
    }

    #[test]
    fn partial_trace_dimension_mismatch() {
        let m = CMatrix::identity(5);
        assert!(matches!(partial_trace(&m, (2, 2), Subsystem::First), Err(QmatError::DimensionMismatch { .. })));
    }

    #[test]
    fn partial_trace_preserves_trace_and_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let m = random::hermitian(&mut rng, 6);
            let n = random::hermitian(&mut rng, 6);
            for which in [Subsystem::First, Subsystem::Second] {
                let pm = partial_trace(&m, (2, 3), which).unwrap();
                assert!((pm.trace() - m.trace()).norm() < 1e-12);
                let mut combo = m.scale(0.3);
                combo.add_scaled(-1.7, &n);
                let lhs = partial_trace(&combo, (2, 3), which).unwrap();
                let mut rhs = pm.scale(0.3);
                rhs.add_scaled(-1.7, &partial_trace(&n, (2, 3), which).unwrap());
                assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            }
        }
    }

    #[test]
    fn trace_distance_examples() {
        let zero = CMatrix::basis_op(2, 0, 0);
        let one = CMatrix::basis_op(2, 1, 1);
        assert!(trace_distance(&zero, &zero).unwrap().abs() < 1e-14);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-12);
        let s = 0.5f64.sqrt();
        let plus = CMatrix::outer(&[c(s), c(s)], &[c(s), c(s)]);
        // closed form for pure states: sqrt(1 - |<psi|phi>|^2)
        let expected = (1.0 - 0.5f64).sqrt();
        assert!((trace_distance(&zero, &plus).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn trace_distance_metric_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let a = random::density_matrix(&mut rng, 4);
            let b = random::density_matrix(&mut rng, 4);
            let c = random::density_matrix(&mut rng, 4);
            let ab = trace_distance(&a, &b).unwrap();
            let ba = trace_distance(&b, &a).unwrap();
            let bc = trace_distance(&b, &c).unwrap();
            let ac = trace_distance(&a, &c).unwrap();
            assert!((ab - ba).abs() < 1e-10);
            assert!(ab >= -1e-10 && ab <= 1.0 + 1e-10);
            assert!(ac <= ab + bc + 1e-10);
        }
    }

    #[test]
    fn trace_distance_dimension_mismatch() {
        assert!(trace_distance(&CMatrix::identity(2), &CMatrix::identity(4)).is_err());
    }

    #[test]
    fn project_psd_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psd = random::density_matrix(&mut rng, 4).scale(3.0);
        assert!(project_psd(&psd).unwrap().max_abs_diff(&psd) < 1e-12);
        let m = CMatrix::diag(&[1.0, -1.0]);
        assert!(project_psd(&m).unwrap().max_abs_diff(&CMatrix::diag(&[1.0, 0.0])) < 1e-14);
        let not_herm = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(project_psd(&not_herm), Err(QmatError::NotHermitian { .. })));
    }

    #[test]
    fn project_psd_beats_random_candidates() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let m = random::hermitian(&mut rng, 3);
        let p = project_psd(&m).unwrap();
        let best = (&m - &p).frobenius_norm();
        for _ in 0..1000 {
            let g = random::ginibre(&mut rng, 3, 3);
            let cand = g.matmul(&g.dagger()).scale(0.5);
            assert!((&m - &cand).frobenius_norm() >= best - 1e-12);
        }
    }
}
