//! Channel-design semidefinite programs.
//!
//! Given a classifier unitary `U`, a POVM `{Π_k}` and labelled samples
//! `(σ_i, C_i)`, find the Choi matrix `J` maximizing the weighted
//! correct-class probability `Σ_i w_i Tr[M_i J]` subject to
//!
//! ```text
//! J ⪰ 0
//! Tr_out J = I
//! Tr_out[(I ⊗ Π'_k) J] − γ I ⪰ 0        for every outcome k
//! J − (κ/d) I ⪰ 0                      with κ = 1 − α
//! ```
//!
//! In the post-order program the channel acts after the classifier:
//! `M_i = (U σ_i U†)ᵀ ⊗ Π_{C_i}` and `Π'_k = Π_k`. In the pre-order program
//! it acts before: `M_i = σ_iᵀ ⊗ U† Π_{C_i} U` and `Π'_k = U† Π_k U`.

mod certificate;
mod solver;

use alloc::vec::Vec;

use thiserror::Error;

pub use certificate::{probe_definition, verify_contraction_certificate, ContractionReport, DefinitionProbe};
pub use solver::{solve, SolveStatus, SolverConfig, SolverResult};

use crate::channels::{ChannelError, ChoiMatrix, DensityMatrix, PovmSet};
use crate::dpbounds::AlphaGamma;
use crate::qmat::{self, kron, CMatrix, QmatError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SdpError {
    #[error(transparent)]
    Matrix(#[from] QmatError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("label {label} outside the {outcomes}-outcome POVM")]
    LabelOutOfRange { label: usize, outcomes: usize },
    #[error("no samples supplied")]
    NoSamples,
    #[error("solver tolerances and step must be positive and relaxation in (0, 2)")]
    InvalidConfig,
    #[error("contraction certificate precondition violated (λ_min(J − κI/d) = {min_eigenvalue:e})")]
    CertificatePrecondition { min_eigenvalue: f64 },
}

/// Where the noise channel sits relative to the classifier unitary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Pre,
    Post,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub state: DensityMatrix,
    pub label: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemWarning {
    /// `γ·K > 1`: no channel can keep every outcome above the floor.
    FloorInfeasible,
}

/// Constraint families of an assembled problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstraintCount {
    pub gamma_blocks: usize,
    pub kappa_blocks: usize,
    pub tp_affine: usize,
    pub psd_cones: usize,
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    dim: usize,
    order: Order,
    unitary: CMatrix,
    povm: PovmSet,
    ag: AlphaGamma,
    samples: Vec<Sample>,
    /// `(w_i, M_i)` per sample.
    terms: Vec<(f64, CMatrix)>,
    /// `Π'_k` in the floor constraints.
    effects: Vec<CMatrix>,
    /// `Σ w_i M_i / Σ w_i`.
    cost: CMatrix,
    warnings: Vec<ProblemWarning>,
}

/// Inverse class-frequency weights `w_i = N / (K · count(C_i))`, with `K` the
/// number of classes present. Balanced data gets unit weights.
pub fn class_weights(labels: &[usize]) -> Vec<f64> {
    let max = labels.iter().copied().max().unwrap_or(0);
    let mut counts = alloc::vec![0usize; max + 1];
    for &l in labels {
        counts[l] += 1;
    }
    let present = counts.iter().filter(|&&c| c > 0).count() as f64;
    let n = labels.len() as f64;
    labels.iter().map(|&l| n / (present * counts[l] as f64)).collect()
}

pub fn build_problem(
    order: Order,
    unitary: &CMatrix,
    povm: &PovmSet,
    samples: Vec<Sample>,
    ag: AlphaGamma,
) -> Result<SdpProblem, SdpError> {
    let d = povm.dim();
    if unitary.rows() != d || unitary.cols() != d {
        return Err(SdpError::DimensionMismatch { expected: d, got: unitary.rows() });
    }
    if samples.is_empty() {
        return Err(SdpError::NoSamples);
    }
    for s in &samples {
        if s.state.dim() != d {
            return Err(SdpError::DimensionMismatch { expected: d, got: s.state.dim() });
        }
        if s.label >= povm.len() {
            return Err(SdpError::LabelOutOfRange { label: s.label, outcomes: povm.len() });
        }
    }
    let effects: Vec<CMatrix> = match order {
        Order::Post => povm.elements().to_vec(),
        Order::Pre => povm.pulled_back(unitary).elements().to_vec(),
    };
    let labels: Vec<usize> = samples.iter().map(|s| s.label).collect();
    let weights = class_weights(&labels);
    let terms: Vec<(f64, CMatrix)> = samples
        .iter()
        .zip(&weights)
        .map(|(s, &w)| {
            let m = match order {
                Order::Post => kron(&s.state.evolve(unitary).matrix().transpose(), &povm.elements()[s.label]),
                Order::Pre => kron(&s.state.matrix().transpose(), &effects[s.label]),
            };
            (w, m)
        })
        .collect();
    let total: f64 = weights.iter().sum();
    let mut cost = CMatrix::zeros(d * d, d * d);
    for (w, m) in &terms {
        cost.add_scaled(w / total, m);
    }
    let mut warnings = Vec::new();
    if ag.gamma() * povm.len() as f64 > 1.0 + 1e-12 {
        warnings.push(ProblemWarning::FloorInfeasible);
    }
    Ok(SdpProblem {
        dim: d,
        order,
        unitary: unitary.clone(),
        povm: povm.clone(),
        ag,
        samples,
        terms,
        effects,
        cost: cost.hermitian_part(),
        warnings,
    })
}

impl SdpProblem {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn povm(&self) -> &PovmSet {
        &self.povm
    }

    pub fn alpha_gamma(&self) -> AlphaGamma {
        self.ag
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn terms(&self) -> &[(f64, CMatrix)] {
        &self.terms
    }

    /// Effects `Π'_k` entering the floor constraints.
    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    pub fn warnings(&self) -> &[ProblemWarning] {
        &self.warnings
    }

    pub fn constraint_count(&self) -> ConstraintCount {
        ConstraintCount { gamma_blocks: self.effects.len(), kappa_blocks: 1, tp_affine: 1, psd_cones: 1 }
    }

    /// Weighted mean correct-class probability `Σ w_i Tr[M_i J] / Σ w_i`.
    pub fn objective(&self, j: &ChoiMatrix) -> f64 {
        self.cost.inner(j.matrix()).re
    }

    pub(crate) fn cost(&self) -> &CMatrix {
        &self.cost
    }
}

/// Residuals of a Choi matrix against the constraint families of a problem.
/// PSD-block residuals are `max(0, −λ_min(block))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    pub cp: f64,
    pub tp: f64,
    pub gamma_blocks: Vec<f64>,
    pub kappa_block: f64,
    pub cp_pass: bool,
    pub tp_pass: bool,
    pub gamma_pass: Vec<bool>,
    pub kappa_pass: bool,
}

impl ConstraintReport {
    pub fn all_pass(&self) -> bool {
        self.cp_pass && self.tp_pass && self.kappa_pass && self.gamma_pass.iter().all(|&p| p)
    }

    /// Largest PSD-block residual.
    pub fn worst_psd(&self) -> f64 {
        self.gamma_blocks.iter().copied().fold(self.cp.max(self.kappa_block), f64::max)
    }
}

fn psd_residual(m: &CMatrix) -> Result<f64, QmatError> {
    Ok((-qmat::min_eigenvalue(&m.hermitian_part())?).max(0.0))
}

/// Checks `j` against every constraint of `p`: PSD blocks pass when their
/// residual is at most `psd_tol`, TP when `‖Tr_out J − I‖_F ≤ tp_tol`.
pub fn validate_channel_constraints_with(
    j: &ChoiMatrix,
    p: &SdpProblem,
    psd_tol: f64,
    tp_tol: f64,
) -> Result<ConstraintReport, SdpError> {
    let d = p.dim;
    if j.dim() != d {
        return Err(SdpError::DimensionMismatch { expected: d, got: j.dim() });
    }
    let eig = qmat::eig_hermitian(j.matrix())?;
    let lmin = eig.eigenvalues[0];
    let cp = (-lmin).max(0.0);
    let kappa_block = (p.ag.kappa() / d as f64 - lmin).max(0.0);
    let tp = (&j.input_marginal() - &CMatrix::identity(d)).frobenius_norm();
    let floor = CMatrix::identity(d).scale(p.ag.gamma());
    let gamma_blocks = p
        .effects
        .iter()
        .map(|e| psd_residual(&(&j.effect_marginal(e) - &floor)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ConstraintReport {
        cp,
        tp,
        gamma_pass: gamma_blocks.iter().map(|&r| r <= psd_tol).collect(),
        gamma_blocks,
        kappa_block,
        cp_pass: cp <= psd_tol,
        tp_pass: tp <= tp_tol,
        kappa_pass: kappa_block <= psd_tol,
    })
}

/// [`validate_channel_constraints_with`] using one tolerance for every block.
pub fn validate_channel_constraints(j: &ChoiMatrix, p: &SdpProblem, tol: f64) -> Result<ConstraintReport, SdpError> {
    validate_channel_constraints_with(j, p, tol, tol)
}

/// Complex variable count `d⁴ = 2^{4n}` of an `n`-qubit channel. The real
/// scalar count is twice this.
pub fn problem_size(n_qubits: u32) -> u64 {
    1u64 << (4 * n_qubits)
}
