//! Cyclic Jacobi eigensolver for complex Hermitian matrices.

use alloc::vec::Vec;

// only needed when std is absent from the build
#[allow(unused_imports)]
use num_traits::Float;

use super::{require_hermitian, CMatrix, QmatError, C64, ZERO};
use crate::consts::{HERMITIAN_TOL, JACOBI_MAX_SWEEPS, JACOBI_TOL};

/// Spectral decomposition `A = V diag(λ) V†` with ascending `λ`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors stored as columns.
    pub eigenvectors: CMatrix,
}

impl HermitianEigen {
    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }

    /// `V diag(f(λ)) V†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let weights: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = CMatrix::zeros(n, n);
        for (k, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * w;
                if vik == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.reconstruct_with(|l| l)
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary, then applies the real symmetric Schur rotation. Sweeps stop once
/// the off-diagonal Frobenius norm is below `JACOBI_TOL · ‖A‖_F`.
pub fn eig_hermitian(m: &CMatrix) -> Result<HermitianEigen, QmatError> {
    require_hermitian(m, HERMITIAN_TOL)?;
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm();

    if n > 1 && scale > 0.0 {
        let threshold = JACOBI_TOL * scale;
        for _ in 0..JACOBI_MAX_SWEEPS {
            if off_diagonal_norm(&a) <= threshold {
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(HermitianEigen { eigenvalues, eigenvectors })
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Skip pivots that are negligible next to the diagonal.
    if mag <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let phase = apq / mag; // e^{iφ}
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 { 1.0 / (tau + (1.0 + tau * tau).sqrt()) } else { -1.0 / (-tau + (1.0 + tau * tau).sqrt()) };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // V = diag(1, e^{-iφ}) · [[c, s], [-s, c]] restricted to (p, q).
    let e = phase.conj();
    let vpp = C64::new(c, 0.0);
    let vpq = C64::new(s, 0.0);
    let vqp = e * (-s);
    let vqq = e * c;

    let n = a.rows();
    // A ← A V (columns p, q)
    for i in 0..n {
        let aip = a[(i, p)];
        let aiq = a[(i, q)];
        a[(i, p)] = aip * vpp + aiq * vqp;
        a[(i, q)] = aip * vpq + aiq * vqq;
    }
    // A ← V† A (rows p, q)
    for j in 0..n {
        let apj = a[(p, j)];
        let aqj = a[(q, j)];
        a[(p, j)] = vpp.conj() * apj + vqp.conj() * aqj;
        a[(q, j)] = vpq.conj() * apj + vqq.conj() * aqj;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    for i in 0..n {
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = vip * vpp + viq * vqp;
        v[(i, q)] = vip * vpq + viq * vqq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_spectrum() {
        let e = eig_hermitian(&CMatrix::identity(4)).unwrap();
        assert_eq!(e.eigenvalues, [1.0; 4]);
    }

    #[test]
    fn pauli_z_spectrum() {
        let e = eig_hermitian(&CMatrix::diag(&[1.0, -1.0])).unwrap();
        assert_eq!(e.eigenvalues, [-1.0, 1.0]);
    }

    #[test]
    fn pauli_y_spectrum() {
        let y = CMatrix::from_vec(2, 2, alloc::vec![ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO]).unwrap();
        let e = eig_hermitian(&y).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14 && (e.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert!(e.reconstruct().max_abs_diff(&y) < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_real(2, 2, &[1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(eig_hermitian(&m), Err(QmatError::NotHermitian { .. })));
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.gen_range(1..=64);
            let m = random::hermitian(&mut rng, n);
            let e = eig_hermitian(&m).unwrap();
            assert!((&e.reconstruct() - &m).frobenius_norm() < 1e-10, "reconstruction n={n}");
            let vtv = e.eigenvectors.dagger().matmul(&e.eigenvectors);
            assert!((&vtv - &CMatrix::identity(n)).frobenius_norm() < 1e-10, "orthonormality n={n}");
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn degenerate_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random::unitary(&mut rng, 6);
        let m = CMatrix::diag(&[2.0, 2.0, 2.0, -1.0, -1.0, 0.0]).conjugate_by(&u);
        let e = eig_hermitian(&m).unwrap();
        let expected = [-1.0, -1.0, 0.0, 2.0, 2.0, 2.0];
        for (l, x) in e.eigenvalues.iter().zip(expected) {
            assert!((l - x).abs() < 1e-12);
        }
        assert!((&e.reconstruct() - &m).frobenius_norm() < 1e-10);
    }

    #[test]
    fn psd_eigenvalues_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..30 {
            let g = random::ginibre(&mut rng, 8, 3);
            let psd = g.matmul(&g.dagger());
            let e = eig_hermitian(&psd).unwrap();
            assert!(e.eigenvalues[0] >= -1e-10);
        }
    }
}
