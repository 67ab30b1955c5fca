//! Seeded random matrices and states used by probes, oracles and tests.

use alloc::vec::Vec;
use core::f64::consts::PI;

// only needed when std is absent from the build
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::qmat::{CMatrix, C64};

/// Standard normal sample (Box–Muller).
pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(normal(rng), normal(rng))
}

/// Matrix with i.i.d. complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Random Hermitian matrix `(G + G†)/2`.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    ginibre(rng, n, n).hermitian_part()
}

/// Haar-random pure state vector.
pub fn pure_state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<C64> {
    let mut v: Vec<C64> = (0..d).map(|_| complex_normal(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    v
}

/// Random mixed state `G G† / Tr[G G†]` with a random rank in `1..=d`.
pub fn density_matrix<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let rank = rng.gen_range(1..=d);
    let g = ginibre(rng, d, rank);
    let m = g.matmul(&g.dagger());
    let tr = m.trace().re;
    m.scale(1.0 / tr)
}

/// Haar-random unitary via Gram–Schmidt on a Ginibre matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let g = ginibre(rng, d, d);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v = g.column(j);
        for u in &cols {
            let proj: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= proj * y;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in &mut v {
            *x /= norm;
        }
        cols.push(v);
    }
    CMatrix::from_fn(d, d, |i, j| cols[j][i])
}

/// Random Kraus set `{K_m}` with `Σ K_m† K_m = I`, built from a random
/// isometry `V: C^d → C^{d·m}`.
pub fn kraus_ops<R: Rng + ?Sized>(rng: &mut R, d: usize, count: usize) -> Vec<CMatrix> {
    let big = unitary(rng, d * count);
    (0..count)
        .map(|m| CMatrix::from_fn(d, d, |a, i| big[(m * d + a, i)]))
        .collect()
}

/// Random real vector with entries uniform in `[lo, hi)`.
pub fn uniform_vec<R: Rng + ?Sized>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}
