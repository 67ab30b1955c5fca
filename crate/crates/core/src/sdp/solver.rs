//! ADMM for the channel-design programs.
//!
//! Splitting: the Choi matrix `J` carries the objective and the trace
//! constraint, and two families of slack variables carry the cones:
//!
//! ```text
//! Z   = J − (κ/d) I        Z ⪰ 0
//! S_k = L_k(J) − γ I       S_k ⪰ 0,   L_k(J) = Tr_out[(I ⊗ P_k) J]
//! ```
//!
//! `J ⪰ 0` follows from `Z ⪰ 0` because `κ ≥ 0`. The `J` step is an
//! equality-constrained quadratic whose normal operator `I + Σ L_k* L_k`
//! acts on each `d×d` output block `X` as `X ↦ X + Σ_k Tr[P_k X] P_k`. It is
//! inverted in closed form with a `K×K` Woodbury solve, and the trace
//! constraint adds a multiple of `Q⁻¹(I)` per block.
//!
//! Cone projections clip the spectrum of the complex Hermitian matrix
//! directly. Eigenvectors from the previous iteration seed each
//! decomposition, so late iterations need about one Jacobi sweep.
//!
//! After the iterations stop, the iterate is mixed with `I/d` (bisection on
//! the mixing weight) until every block violation is at most
//! [`SDP_REPAIR_TOL`], so the returned channel is feasible to that level.

use alloc::vec::Vec;

// only needed when std is absent from the build
#[allow(unused_imports)]
use num_traits::Float;

use super::{validate_channel_constraints_with, ConstraintReport, ProblemWarning, SdpError, SdpProblem};
use crate::channels::ChoiMatrix;
use crate::consts::SDP_REPAIR_TOL;
use crate::qmat::{eig_hermitian, CMatrix, QmatError, C64, ZERO};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Absolute part of the primal stopping threshold.
    pub primal_tol: f64,
    /// Absolute part of the dual stopping threshold.
    pub dual_tol: f64,
    /// Relative part of both thresholds, scaled by the iterate and dual norms.
    pub relative_tol: f64,
    /// Accepted `‖Tr_out J − I‖_F`.
    pub tp_tol: f64,
    /// Accepted `−λ_min` of every PSD block.
    pub psd_tol: f64,
    /// Initial penalty `ρ`.
    pub step: f64,
    /// Over-relaxation factor in `(0, 2)`.
    pub relaxation: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            primal_tol: 1e-9,
            dual_tol: 1e-9,
            relative_tol: 1e-6,
            tp_tol: 1e-10,
            psd_tol: crate::consts::SDP_PSD_TOL,
            step: 1.0,
            relaxation: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SdpError> {
        let positive = [self.primal_tol, self.dual_tol, self.tp_tol, self.psd_tol, self.step];
        if positive.iter().any(|&x| !(x > 0.0 && x.is_finite()))
            || !(self.relative_tol >= 0.0 && self.relative_tol.is_finite())
            || !(self.relaxation > 0.0 && self.relaxation < 2.0)
        {
            return Err(SdpError::InvalidConfig);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::MaxIter => "max-iter",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    pub choi: ChoiMatrix,
    /// Weighted mean correct-class probability.
    pub objective_value: f64,
    pub residuals: ConstraintReport,
    pub status: SolveStatus,
    pub iterations: usize,
    /// ADMM residuals at the last iteration, before repair.
    pub primal_residual: f64,
    pub dual_residual: f64,
}

/// Block-structured helpers for a `d²×d²` Choi matrix.
struct Blocks<'a> {
    d: usize,
    effects: &'a [CMatrix],
    /// `(I + Gram)⁻¹`, row-major `K×K`.
    woodbury: Vec<f64>,
    /// `Q⁻¹(I)` and its trace.
    g: CMatrix,
    g_trace: f64,
}

impl<'a> Blocks<'a> {
    fn new(d: usize, effects: &'a [CMatrix]) -> Self {
        let k = effects.len();
        let mut m = alloc::vec![0.0; k * k];
        for a in 0..k {
            for b in 0..k {
                m[a * k + b] = effects[a].inner(&effects[b]).re + if a == b { 1.0 } else { 0.0 };
            }
        }
        let woodbury = invert_spd(&m, k);
        let mut blocks = Self { d, effects, woodbury, g: CMatrix::zeros(d, d), g_trace: 0.0 };
        let g = blocks.q_inverse(&CMatrix::identity(d));
        blocks.g_trace = g.trace().re;
        blocks.g = g;
        blocks
    }

    /// `Q⁻¹(X) = X − Σ c_k P_k` with `c = (I + Gram)⁻¹ (Tr[P_j X])_j`.
    fn q_inverse(&self, x: &CMatrix) -> CMatrix {
        let k = self.effects.len();
        let t: Vec<C64> = self.effects.iter().map(|p| p.trace_of_product(x)).collect();
        let mut out = x.clone();
        for a in 0..k {
            let c: C64 = (0..k).map(|b| t[b] * self.woodbury[a * k + b]).sum();
            for (o, p) in out.as_mut_slice().iter_mut().zip(self.effects[a].as_slice()) {
                *o -= c * p;
            }
        }
        out
    }

    fn block(&self, m: &CMatrix, i: usize, j: usize) -> CMatrix {
        let d = self.d;
        CMatrix::from_fn(d, d, |a, b| m[(i * d + a, j * d + b)])
    }

    fn set_block(&self, m: &mut CMatrix, i: usize, j: usize, x: &CMatrix) {
        let d = self.d;
        for a in 0..d {
            for b in 0..d {
                m[(i * d + a, j * d + b)] = x[(a, b)];
            }
        }
    }

    /// `L_k(J)[i, j] = Tr[P_k J_ij]`.
    fn lmap(&self, j: &CMatrix, k: usize) -> CMatrix {
        let d = self.d;
        let p = &self.effects[k];
        CMatrix::from_fn(d, d, |i, jj| {
            let mut acc = ZERO;
            for a in 0..d {
                for b in 0..d {
                    acc += p[(a, b)] * j[(i * d + b, jj * d + a)];
                }
            }
            acc
        })
    }

    /// `target += Y ⊗ P_k`.
    fn add_adjoint(&self, target: &mut CMatrix, y: &CMatrix, k: usize) {
        let d = self.d;
        let p = &self.effects[k];
        for i in 0..d {
            for j in 0..d {
                let yij = y[(i, j)];
                if yij == ZERO {
                    continue;
                }
                for a in 0..d {
                    for b in 0..d {
                        target[(i * d + a, j * d + b)] += yij * p[(a, b)];
                    }
                }
            }
        }
    }

    /// Solves `Q(J_ij) = R_ij + ν_ij I` with `Tr J_ij = δ_ij` for every block.
    fn j_update(&self, r: &CMatrix) -> CMatrix {
        let d = self.d;
        let mut j = CMatrix::zeros(d * d, d * d);
        for a in 0..d {
            for b in a..d {
                let mut x = self.q_inverse(&self.block(r, a, b));
                let target = if a == b { 1.0 } else { 0.0 };
                let nu = (C64::new(target, 0.0) - x.trace()) / self.g_trace;
                for (o, g) in x.as_mut_slice().iter_mut().zip(self.g.as_slice()) {
                    *o += nu * g;
                }
                if a == b {
                    x = x.hermitian_part();
                } else {
                    self.set_block(&mut j, b, a, &x.dagger());
                }
                self.set_block(&mut j, a, b, &x);
            }
        }
        j
    }
}

/// Inverse of a small symmetric positive definite matrix by Gauss–Jordan.
fn invert_spd(m: &[f64], n: usize) -> Vec<f64> {
    let mut a = m.to_vec();
    let mut inv = alloc::vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs())).unwrap();
        if pivot != col {
            for c in 0..n {
                a.swap(col * n + c, pivot * n + c);
                inv.swap(col * n + c, pivot * n + c);
            }
        }
        let p = a[col * n + col];
        for c in 0..n {
            a[col * n + c] /= p;
            inv[col * n + c] /= p;
        }
        for r in 0..n {
            if r != col {
                let f = a[r * n + col];
                if f != 0.0 {
                    for c in 0..n {
                        a[r * n + c] -= f * a[col * n + c];
                        inv[r * n + c] -= f * inv[col * n + c];
                    }
                }
            }
        }
    }
    inv
}

/// PSD projection seeded with the eigenvectors of a previous call.
struct WarmProjector {
    basis: CMatrix,
}

impl WarmProjector {
    fn new(n: usize) -> Self {
        Self { basis: CMatrix::identity(n) }
    }

    fn project(&mut self, m: &CMatrix) -> Result<CMatrix, QmatError> {
        let rotated = m.conjugate_by(&self.basis.dagger()).hermitian_part();
        let eig = eig_hermitian(&rotated)?;
        self.basis = orthonormalize(self.basis.matmul(&eig.eigenvectors));
        let n = m.rows();
        let mut out = CMatrix::zeros(n, n);
        for (k, &l) in eig.eigenvalues.iter().enumerate() {
            if l <= 0.0 {
                continue;
            }
            let v = self.basis.column(k);
            for i in 0..n {
                let vi = v[i] * l;
                for j in 0..n {
                    out[(i, j)] += vi * v[j].conj();
                }
            }
        }
        Ok(out)
    }
}

/// Modified Gram–Schmidt on the columns; repeated products drift off unitary.
fn orthonormalize(mut b: CMatrix) -> CMatrix {
    let n = b.rows();
    for k in 0..n {
        for prev in 0..k {
            let mut dot = ZERO;
            for i in 0..n {
                dot += b[(i, prev)].conj() * b[(i, k)];
            }
            for i in 0..n {
                let v = b[(i, prev)];
                b[(i, k)] -= dot * v;
            }
        }
        let norm = (0..n).map(|i| b[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            b[(i, k)] /= norm;
        }
    }
    b
}

fn shifted(m: &CMatrix, shift: f64) -> CMatrix {
    let mut out = m.clone();
    for i in 0..m.rows() {
        out[(i, i)] -= C64::new(shift, 0.0);
    }
    out
}

fn sq_norm(a: &CMatrix) -> f64 {
    a.as_slice().iter().map(|x| x.norm_sqr()).sum()
}

fn sq_dist(a: &CMatrix, b: &CMatrix) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).norm_sqr()).sum()
}

/// Largest PSD-block violation of `j`.
fn block_violation(blocks: &Blocks<'_>, j: &CMatrix, kappa_d: f64, gamma: f64) -> Result<f64, QmatError> {
    let mut worst = -eig_hermitian(&shifted(j, kappa_d).hermitian_part())?.eigenvalues[0];
    for k in 0..blocks.effects.len() {
        let l = shifted(&blocks.lmap(j, k), gamma).hermitian_part();
        worst = worst.max(-eig_hermitian(&l)?.eigenvalues[0]);
    }
    Ok(worst)
}

/// Smallest mixing weight toward `I/d` that brings every block violation to
/// within [`SDP_REPAIR_TOL`]. `None` if `I/d` itself is infeasible.
fn repair(blocks: &Blocks<'_>, j: &CMatrix, kappa_d: f64, gamma: f64) -> Result<Option<CMatrix>, QmatError> {
    let n = j.rows();
    let center = CMatrix::identity(n).scale(1.0 / blocks.d as f64);
    if block_violation(blocks, j, kappa_d, gamma)? <= SDP_REPAIR_TOL {
        return Ok(Some(j.clone()));
    }
    if block_violation(blocks, &center, kappa_d, gamma)? > SDP_REPAIR_TOL {
        return Ok(None);
    }
    let mix = |t: f64| {
        let mut m = j.scale(1.0 - t);
        m.add_scaled(t, &center);
        m
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if block_violation(blocks, &mix(mid), kappa_d, gamma)? <= SDP_REPAIR_TOL {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(Some(mix(hi)))
}

/// Maximizes the weighted correct-class probability of `p`.
///
/// Deterministic: the iteration starts from `I/d` and uses no randomness.
pub fn solve(p: &SdpProblem, cfg: &SolverConfig) -> Result<SolverResult, SdpError> {
    cfg.validate()?;
    let d = p.dim();
    let n = d * d;
    let kappa_d = p.alpha_gamma().kappa() / d as f64;
    let gamma = p.alpha_gamma().gamma();
    // J ⪰ κI/d already gives L_k(J) ⪰ κ·Tr[P_k]/d·I, so those floors need no slack
    let active: Vec<CMatrix> =
        p.effects().iter().filter(|e| gamma > kappa_d * e.trace().re).cloned().collect();
    let blocks = Blocks::new(d, &active);
    let k_count = active.len();
    let center = CMatrix::identity(n).scale(1.0 / d as f64);

    let finish = |j: CMatrix, status: SolveStatus, iterations: usize, r: f64, s: f64| -> Result<SolverResult, SdpError> {
        let choi = ChoiMatrix::from_matrix(d, j.hermitian_part())?;
        let residuals = validate_channel_constraints_with(&choi, p, cfg.psd_tol, cfg.tp_tol)?;
        let status = match status {
            SolveStatus::Optimal if !residuals.all_pass() => SolveStatus::MaxIter,
            other => other,
        };
        Ok(SolverResult {
            objective_value: p.objective(&choi),
            choi,
            residuals,
            status,
            iterations,
            primal_residual: r,
            dual_residual: s,
        })
    };

    if p.warnings().contains(&ProblemWarning::FloorInfeasible) {
        return finish(center, SolveStatus::Infeasible, 0, f64::INFINITY, f64::INFINITY);
    }

    let mut rho = cfg.step;
    let a = cfg.relaxation;
    let mut j = center.clone();
    let mut z = shifted(&j, kappa_d);
    let mut uz = CMatrix::zeros(n, n);
    let mut zproj = WarmProjector::new(n);
    let mut s: Vec<CMatrix> = Vec::with_capacity(k_count);
    let mut sproj: Vec<WarmProjector> = Vec::with_capacity(k_count);
    for k in 0..k_count {
        let mut proj = WarmProjector::new(d);
        s.push(proj.project(&shifted(&blocks.lmap(&j, k), gamma))?);
        sproj.push(proj);
    }
    let mut us: Vec<CMatrix> = (0..k_count).map(|_| CMatrix::zeros(d, d)).collect();

    let (mut r_norm, mut s_norm) = (f64::INFINITY, f64::INFINITY);
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=cfg.max_iterations {
        iterations = it;
        // J step
        let mut rhs = shifted(&(&z - &uz), -kappa_d);
        for k in 0..k_count {
            let b = shifted(&(&s[k] - &us[k]), -gamma);
            blocks.add_adjoint(&mut rhs, &b, k);
        }
        rhs.add_scaled(1.0 / rho, p.cost());
        j = blocks.j_update(&rhs);

        // slack steps with over-relaxation
        let jz = shifted(&j, kappa_d);
        let mut xz = jz.scale(a);
        xz.add_scaled(1.0 - a, &z);
        let z_new = zproj.project(&(&xz + &uz))?;
        uz.add_scaled(1.0, &xz);
        uz.add_scaled(-1.0, &z_new);
        let mut primal = sq_dist(&jz, &z_new);
        let mut x_norm = sq_norm(&jz).max(sq_norm(&z_new));
        let mut u_norm = sq_norm(&uz);
        let mut dual = &z_new - &z;

        for k in 0..k_count {
            let lk = shifted(&blocks.lmap(&j, k), gamma);
            let mut xs = lk.scale(a);
            xs.add_scaled(1.0 - a, &s[k]);
            let s_new = sproj[k].project(&(&xs + &us[k]))?;
            us[k].add_scaled(1.0, &xs);
            us[k].add_scaled(-1.0, &s_new);
            primal += sq_dist(&lk, &s_new);
            x_norm += sq_norm(&lk).max(sq_norm(&s_new));
            u_norm += sq_norm(&us[k]);
            blocks.add_adjoint(&mut dual, &(&s_new - &s[k]), k);
            s[k] = s_new;
        }
        z = z_new;

        r_norm = primal.sqrt();
        s_norm = rho * dual.frobenius_norm();
        let eps_primal = cfg.primal_tol + cfg.relative_tol * x_norm.sqrt();
        let eps_dual = cfg.dual_tol + cfg.relative_tol * rho * u_norm.sqrt();
        if r_norm <= eps_primal && s_norm <= eps_dual {
            converged = true;
            break;
        }

        // residual balancing; scaled duals follow ρ
        if it % 25 == 0 {
            let factor = if r_norm > 10.0 * s_norm {
                2.0
            } else if s_norm > 10.0 * r_norm {
                0.5
            } else {
                1.0
            };
            if factor != 1.0 && (1e-6..=1e6).contains(&(rho * factor)) {
                rho *= factor;
                uz = uz.scale(1.0 / factor);
                for u in &mut us {
                    *u = u.scale(1.0 / factor);
                }
            }
        }
    }

    let status = if converged { SolveStatus::Optimal } else { SolveStatus::MaxIter };
    match repair(&blocks, &j.hermitian_part(), kappa_d, gamma)? {
        Some(fixed) => finish(fixed, status, iterations, r_norm, s_norm),
        None => finish(j, SolveStatus::MaxIter, iterations, r_norm, s_norm),
    }
}
