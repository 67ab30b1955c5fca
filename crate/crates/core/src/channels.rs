//! Quantum channels in the Choi representation.
//!
//! The convention is fixed crate-wide:
//!
//! ```text
//! J = Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)          (input ⊗ output, Tr J = d)
//! E(ρ)  = Tr_in[(ρᵀ ⊗ I) J]
//! y_k(ρ) = Tr[(ρᵀ ⊗ Π_k) J] = Tr[Π_k E(ρ)]
//! ```
//!
//! Trace preservation reads `Tr_out J = I`, complete positivity `J ⪰ 0`.

use alloc::vec;
use alloc::vec::Vec;

// only needed when std is absent from the build
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::consts::{HERMITIAN_TOL, KRAUS_EIG_CUTOFF, KRAUS_TOL, POVM_TOL, STATE_TOL};
use crate::gates;
use crate::qmat::{self, eig_hermitian, partial_trace, CMatrix, QmatError, Subsystem, C64, ZERO};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error(transparent)]
    Matrix(#[from] QmatError),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("not a density matrix: {0}")]
    InvalidState(&'static str),
    #[error("Kraus set is incomplete (‖Σ K†K − I‖_F = {residual:e})")]
    IncompleteKraus { residual: f64 },
    #[error("Choi matrix is not completely positive (λ_min = {min_eigenvalue:e})")]
    NotCompletelyPositive { min_eigenvalue: f64 },
    #[error("invalid POVM: {0}")]
    InvalidPovm(&'static str),
    #[error("parameter out of range: {0}")]
    OutOfRange(&'static str),
}

/// A d×d Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self, ChannelError> {
        if !m.is_square() {
            return Err(ChannelError::InvalidState("not square"));
        }
        if !m.is_hermitian(STATE_TOL) {
            return Err(ChannelError::InvalidState("not Hermitian"));
        }
        if (m.trace().re - 1.0).abs() > STATE_TOL {
            return Err(ChannelError::InvalidState("trace differs from 1"));
        }
        if qmat::min_eigenvalue(&m)? < -STATE_TOL {
            return Err(ChannelError::InvalidState("negative eigenvalue"));
        }
        Ok(Self(m.hermitian_part()))
    }

    /// `|ψ⟩⟨ψ|`; the vector must be normalized.
    pub fn from_pure(psi: &[C64]) -> Result<Self, ChannelError> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(ChannelError::InvalidState("state vector is not normalized"));
        }
        Ok(Self(CMatrix::outer(psi, psi)))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self(CMatrix::identity(d).scale(1.0 / d as f64))
    }

    /// Computational basis projector `|k⟩⟨k|`.
    pub fn basis(d: usize, k: usize) -> Self {
        Self(CMatrix::basis_op(d, k, k))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// `U ρ U†`.
    pub fn evolve(&self, u: &CMatrix) -> Self {
        Self(self.0.conjugate_by(u).hermitian_part())
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64, ChannelError> {
        Ok(qmat::trace_distance(&self.0, &other.0)?)
    }
}

/// Choi matrix of a channel on a `dim`-dimensional system.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    dim: usize,
    matrix: CMatrix,
}

impl ChoiMatrix {
    /// Wraps a `d²×d²` Hermitian matrix. CPTP is not checked here; see
    /// [`validate_cptp`].
    pub fn from_matrix(dim: usize, matrix: CMatrix) -> Result<Self, ChannelError> {
        let n = dim * dim;
        if matrix.rows() != n || matrix.cols() != n {
            return Err(ChannelError::DimensionMismatch { expected: n, got: matrix.rows() });
        }
        let deviation = matrix.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(QmatError::NotHermitian { deviation }.into());
        }
        Ok(Self { dim, matrix: matrix.hermitian_part() })
    }

    /// Identity channel, `J(I) = Σ_ij |ii⟩⟨jj|`.
    pub fn identity(dim: usize) -> Self {
        let mut m = CMatrix::zeros(dim * dim, dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i * dim + i, j * dim + j)] = qmat::ONE;
            }
        }
        Self { dim, matrix: m }
    }

    /// Channel that replaces every input with `I/d`.
    pub fn fully_mixing(dim: usize) -> Self {
        Self { dim, matrix: CMatrix::identity(dim * dim).scale(1.0 / dim as f64) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `Tr_out J`.
    pub fn input_marginal(&self) -> CMatrix {
        partial_trace(&self.matrix, (self.dim, self.dim), Subsystem::Second).expect("square Choi matrix")
    }

    /// `Tr_out[(I ⊗ P) J]`, the operator `A` with `Tr[(ρᵀ ⊗ P) J] = Tr[ρᵀ A]`.
    pub fn effect_marginal(&self, p: &CMatrix) -> CMatrix {
        let d = self.dim;
        CMatrix::from_fn(d, d, |i, j| {
            let mut acc = ZERO;
            for a in 0..d {
                for b in 0..d {
                    acc += p[(a, b)] * self.matrix[(i * d + b, j * d + a)];
                }
            }
            acc
        })
    }

    /// Convex combination `(1 − t)·self + t·other`.
    pub fn mix(&self, other: &ChoiMatrix, t: f64) -> Self {
        assert_eq!(self.dim, other.dim, "mix dimension");
        let mut m = self.matrix.scale(1.0 - t);
        m.add_scaled(t, &other.matrix);
        Self { dim: self.dim, matrix: m }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    ops: Vec<CMatrix>,
}

impl KrausSet {
    pub fn new(ops: Vec<CMatrix>) -> Result<Self, ChannelError> {
        let d = ops.first().map(|k| k.rows()).ok_or(ChannelError::IncompleteKraus { residual: f64::INFINITY })?;
        let mut sum = CMatrix::zeros(d, d);
        for k in &ops {
            if k.rows() != d || k.cols() != d {
                return Err(ChannelError::DimensionMismatch { expected: d, got: k.rows() });
            }
            sum = &sum + &k.dagger().matmul(k);
        }
        let residual = (&sum - &CMatrix::identity(d)).frobenius_norm();
        if residual > KRAUS_TOL {
            return Err(ChannelError::IncompleteKraus { residual });
        }
        Ok(Self { ops })
    }

    pub fn dim(&self) -> usize {
        self.ops[0].rows()
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.ops
    }

    /// `Σ K ρ K†`.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let d = self.dim();
        self.ops.iter().fold(CMatrix::zeros(d, d), |acc, k| &acc + &rho.conjugate_by(k))
    }
}

/// Measurement effects `{Π_k}`: PSD, summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmSet {
    elements: Vec<CMatrix>,
}

impl PovmSet {
    pub fn new(elements: Vec<CMatrix>) -> Result<Self, ChannelError> {
        let d = elements.first().map(|e| e.rows()).ok_or(ChannelError::InvalidPovm("empty"))?;
        let mut sum = CMatrix::zeros(d, d);
        for e in &elements {
            if e.rows() != d || e.cols() != d {
                return Err(ChannelError::DimensionMismatch { expected: d, got: e.rows() });
            }
            if !e.is_hermitian(POVM_TOL) {
                return Err(ChannelError::InvalidPovm("element is not Hermitian"));
            }
            let eig = eig_hermitian(e)?;
            if eig.eigenvalues[0] < -POVM_TOL {
                return Err(ChannelError::InvalidPovm("element is not PSD"));
            }
            if eig.eigenvalues[d - 1] > 1.0 + POVM_TOL {
                return Err(ChannelError::InvalidPovm("element has operator norm above 1"));
            }
            sum = &sum + e;
        }
        if sum.max_abs_diff(&CMatrix::identity(d)) > POVM_TOL {
            return Err(ChannelError::InvalidPovm("elements do not sum to identity"));
        }
        Ok(Self { elements })
    }

    /// `{|k⟩⟨k|}` for `k < d`.
    pub fn computational(d: usize) -> Self {
        Self { elements: (0..d).map(|k| CMatrix::basis_op(d, k, k)).collect() }
    }

    /// Two-outcome measurement of qubit `measured` in an `n`-qubit register:
    /// `Π_0 = |0⟩⟨0|` and `Π_1 = |1⟩⟨1|` on that qubit, identity elsewhere.
    pub fn binary_qubit(n_qubits: usize, measured: usize) -> Self {
        let p0 = gates::on_qubit(&CMatrix::basis_op(2, 0, 0), measured, n_qubits);
        let p1 = gates::on_qubit(&CMatrix::basis_op(2, 1, 1), measured, n_qubits);
        Self { elements: vec![p0, p1] }
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    /// `{U† Π_k U}`, the effects seen before a unitary `U`.
    pub fn pulled_back(&self, u: &CMatrix) -> Self {
        let ud = u.dagger();
        Self { elements: self.elements.iter().map(|e| e.conjugate_by(&ud).hermitian_part()).collect() }
    }

    /// `Tr[Π_k ρ]` for every outcome.
    pub fn probabilities(&self, rho: &CMatrix) -> Vec<f64> {
        self.elements.iter().map(|e| e.trace_of_product(rho).re).collect()
    }
}

/// Result of [`validate_cptp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptpReport {
    /// `max(0, −λ_min(J))`.
    pub cp_residual: f64,
    /// `‖Tr_out J − I‖_F`.
    pub tp_residual: f64,
    pub pass: bool,
}

fn vectorize(k: &CMatrix) -> Vec<C64> {
    // |K⟩⟩ = Σ_i |i⟩ ⊗ K|i⟩, component (i, a) = K[a, i]
    let d = k.rows();
    let mut v = Vec::with_capacity(d * d);
    for i in 0..d {
        for a in 0..d {
            v.push(k[(a, i)]);
        }
    }
    v
}

pub fn choi_from_kraus(k: &KrausSet) -> ChoiMatrix {
    let d = k.dim();
    let mut j = CMatrix::zeros(d * d, d * d);
    for op in k.operators() {
        let v = vectorize(op);
        j = &j + &CMatrix::outer(&v, &v);
    }
    ChoiMatrix { dim: d, matrix: j.hermitian_part() }
}

/// Kraus operators `K_i = √λ_i · reshape(Ψ_i)` from the spectral
/// decomposition of `J`; eigenvalues below the cutoff are dropped.
pub fn kraus_from_choi(j: &ChoiMatrix) -> Result<KrausSet, ChannelError> {
    let d = j.dim;
    let eig = eig_hermitian(&j.matrix)?;
    let min = eig.eigenvalues[0];
    if min < -KRAUS_EIG_CUTOFF.max(1e-8) {
        return Err(ChannelError::NotCompletelyPositive { min_eigenvalue: min });
    }
    let mut ops = Vec::new();
    for (idx, &lambda) in eig.eigenvalues.iter().enumerate().rev() {
        if lambda <= KRAUS_EIG_CUTOFF {
            continue;
        }
        let psi = eig.eigenvector(idx);
        let s = lambda.sqrt();
        ops.push(CMatrix::from_fn(d, d, |a, i| psi[i * d + a] * s));
    }
    KrausSet::new(ops)
}

fn check_state_dim(j: &ChoiMatrix, rho: &DensityMatrix) -> Result<(), ChannelError> {
    if rho.dim() != j.dim {
        return Err(ChannelError::DimensionMismatch { expected: j.dim, got: rho.dim() });
    }
    Ok(())
}

/// `E(ρ) = Tr_in[(ρᵀ ⊗ I) J]` as a raw matrix, for any square input.
pub fn apply_to_matrix(j: &ChoiMatrix, rho: &CMatrix) -> CMatrix {
    let d = j.dim;
    let m = &j.matrix;
    CMatrix::from_fn(d, d, |a, b| {
        let mut acc = ZERO;
        for k in 0..d {
            for i in 0..d {
                let r = rho[(k, i)];
                if r != ZERO {
                    acc += r * m[(k * d + a, i * d + b)];
                }
            }
        }
        acc
    })
}

pub fn apply_channel(j: &ChoiMatrix, rho: &DensityMatrix) -> Result<DensityMatrix, ChannelError> {
    check_state_dim(j, rho)?;
    Ok(DensityMatrix(apply_to_matrix(j, rho.matrix()).hermitian_part()))
}

/// `y_k = Tr[(ρᵀ ⊗ Π_k) J]`.
pub fn measure_probs(j: &ChoiMatrix, rho: &DensityMatrix, povm: &PovmSet) -> Result<Vec<f64>, ChannelError> {
    check_state_dim(j, rho)?;
    if povm.dim() != j.dim {
        return Err(ChannelError::DimensionMismatch { expected: j.dim, got: povm.dim() });
    }
    let d = j.dim;
    let r = rho.matrix();
    let m = &j.matrix;
    Ok(povm
        .elements()
        .iter()
        .map(|p| {
            // Σ ρᵀ[i,k] Π[a,b] J[(k,b),(i,a)]
            let mut acc = ZERO;
            for i in 0..d {
                for k in 0..d {
                    let rt = r[(k, i)];
                    if rt == ZERO {
                        continue;
                    }
                    for a in 0..d {
                        for b in 0..d {
                            acc += rt * p[(a, b)] * m[(k * d + b, i * d + a)];
                        }
                    }
                }
            }
            acc.re
        })
        .collect())
}

pub fn validate_cptp(j: &ChoiMatrix, tol: f64) -> CptpReport {
    let min = qmat::min_eigenvalue(&j.matrix).unwrap_or(f64::NEG_INFINITY);
    let cp_residual = (-min).max(0.0);
    let tp_residual = (&j.input_marginal() - &CMatrix::identity(j.dim)).frobenius_norm();
    CptpReport { cp_residual, tp_residual, pass: cp_residual <= tol && tp_residual <= tol }
}

/// `J = (1 − p)·J(I) + (p/d)·I`, i.e. `ρ ↦ p·I/d + (1 − p)·ρ`.
pub fn depolarizing_choi(p: f64, d: usize) -> Result<ChoiMatrix, ChannelError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ChannelError::OutOfRange("depolarizing p must lie in [0, 1]"));
    }
    Ok(ChoiMatrix::identity(d).mix(&ChoiMatrix::fully_mixing(d), p))
}

/// Empirical average of per-qubit `R_x(θ_i)` layers with each `θ_i` drawn
/// uniformly from `(atan h1, atan h2)`.
pub fn random_rotation_choi(h1: f64, h2: f64, n_qubits: usize, samples: usize, seed: u64) -> Result<ChoiMatrix, ChannelError> {
    if !(h1 < h2) || !h1.is_finite() || !h2.is_finite() {
        return Err(ChannelError::OutOfRange("random rotations need finite h1 < h2"));
    }
    if n_qubits == 0 || samples == 0 {
        return Err(ChannelError::OutOfRange("random rotations need n ≥ 1 and samples ≥ 1"));
    }
    let (lo, hi) = (h1.atan(), h2.atan());
    let d = 1usize << n_qubits;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut j = CMatrix::zeros(d * d, d * d);
    let w = 1.0 / samples as f64;
    for _ in 0..samples {
        let layer: Vec<CMatrix> = (0..n_qubits).map(|_| gates::rx(rng.gen_range(lo..hi))).collect();
        let u = gates::tensor_all(&layer);
        let v = vectorize(&u);
        j.add_scaled(w, &CMatrix::outer(&v, &v));
    }
    Ok(ChoiMatrix { dim: d, matrix: j.hermitian_part() })
}
