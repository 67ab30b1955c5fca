//! Numeric tolerances shared across the crate.

/// Elementwise tolerance for treating a matrix as Hermitian on construction.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Tolerance used by density-matrix validation (trace, eigenvalues).
pub const STATE_TOL: f64 = 1e-10;
/// Completeness tolerance for Kraus sets, `‖Σ K†K − I‖_F`.
pub const KRAUS_TOL: f64 = 1e-8;
/// POVM validation tolerance (PSD, completeness, operator norm).
pub const POVM_TOL: f64 = 1e-10;
/// Relative off-diagonal Frobenius norm at which Jacobi sweeps stop.
pub const JACOBI_TOL: f64 = 1e-12;
/// Upper bound on Jacobi sweeps before giving up on further accuracy.
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Choi eigenvalues below this are dropped when extracting Kraus operators.
pub const KRAUS_EIG_CUTOFF: f64 = 1e-10;
/// CPTP tolerance applied when a serialized channel is loaded.
pub const CHANNEL_LOAD_TOL: f64 = 1e-8;
/// Accepted trace-preservation residual for first-order solver output.
pub const SDP_TP_TOL: f64 = 1e-7;
/// Accepted residual for every PSD block of a solved channel.
pub const SDP_PSD_TOL: f64 = 1e-8;
/// Block violation targeted by the feasibility repair after the solver stops.
pub const SDP_REPAIR_TOL: f64 = 1e-11;
/// Probabilities closer than this are a tie; ties predict class 0.
pub const TIE_TOL: f64 = 1e-7;
/// Central finite-difference step for input gradients.
pub const FD_STEP: f64 = 1e-5;
/// Finite-difference gradient components below this are treated as zero by FGSM.
pub const GRAD_ZERO_TOL: f64 = 1e-10;
/// Floor applied before taking the log of a probability in the loss.
pub const PROB_FLOOR: f64 = 1e-12;
/// Unit-norm tolerance for amplitude embedding inputs.
pub const AMPLITUDE_NORM_TOL: f64 = 1e-8;
