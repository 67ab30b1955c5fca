//! ε-DP and certified-robustness bounds for (α, γ)-channels.
//!
//! An (α, γ)-channel contracts trace distance by at least α and keeps every
//! POVM outcome probability at or above γ. For inputs within trace distance
//! `τ_D` it is ε-DP with `ε = ln(1 + α·τ_D/γ)`. A binary prediction with
//! outcome ratio `B = y_C / y_other` is certified at radius `τ_D` iff
//! `B > e^{2ε}`.

use alloc::vec::Vec;

// only needed when std is absent from the build
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum BoundError {
    #[error("ε is unbounded (zero probability floor with nonzero contraction)")]
    UnboundedEpsilon,
    #[error("sample is misclassified (y_c = {y_c} < y_other = {y_other}); not certifiable")]
    Misclassified { y_c: f64, y_other: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

/// Contraction bound α and measurement floor γ of Definition-style
/// (α, γ)-channels, with `κ = 1 − α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaGamma {
    alpha: f64,
    gamma: f64,
}

impl AlphaGamma {
    pub fn new(alpha: f64, gamma: f64) -> Result<Self, BoundError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(BoundError::InvalidParameter("alpha must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(BoundError::InvalidParameter("gamma must lie in [0, 1]"));
        }
        Ok(Self { alpha, gamma })
    }

    /// Checks the floor against a `classes`-outcome measurement: more than
    /// `1/classes` cannot hold for every outcome at once.
    pub fn for_outcomes(alpha: f64, gamma: f64, classes: usize) -> Result<Self, BoundError> {
        let ag = Self::new(alpha, gamma)?;
        if classes == 0 || gamma * classes as f64 > 1.0 + 1e-12 {
            return Err(BoundError::InvalidParameter("gamma exceeds 1/classes"));
        }
        Ok(ag)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn kappa(&self) -> f64 {
        1.0 - self.alpha
    }
}

/// `ε = ln(1 + α·τ_D/γ)`.
pub fn epsilon_generic(ag: AlphaGamma, tau_d: f64) -> Result<f64, BoundError> {
    if tau_d < 0.0 || tau_d.is_nan() {
        return Err(BoundError::InvalidParameter("tau_d must be nonnegative"));
    }
    let num = ag.alpha * tau_d;
    if num == 0.0 {
        return Ok(0.0);
    }
    if ag.gamma == 0.0 {
        return Err(BoundError::UnboundedEpsilon);
    }
    Ok((num / ag.gamma).ln_1p())
}

/// Depolarizing bound `ε = ln(D(1 − p)τ_D/p + 1)` with `D` the measurement
/// dimension.
pub fn epsilon_depolarizing(p: f64, measurement_dim: usize, tau_d: f64) -> Result<f64, BoundError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(BoundError::InvalidParameter("p must lie in [0, 1]"));
    }
    if measurement_dim == 0 {
        return Err(BoundError::InvalidParameter("measurement dimension must be positive"));
    }
    if tau_d < 0.0 {
        return Err(BoundError::InvalidParameter("tau_d must be nonnegative"));
    }
    if p == 0.0 {
        return if tau_d == 0.0 { Ok(0.0) } else { Err(BoundError::UnboundedEpsilon) };
    }
    Ok((measurement_dim as f64 * (1.0 - p) * tau_d / p).ln_1p())
}

/// Noise level `t = (h + 1)·2^{−1/n}` of the random-rotation mechanism, so
/// that `tⁿ = (1 + h)ⁿ/2`.
pub fn rotation_noise_level(h: f64, n_qubits: u32) -> f64 {
    (h + 1.0) * 2f64.powf(-1.0 / n_qubits as f64)
}

/// Random-rotation bound `ε = ln(τ_D/tⁿ + 1)`.
pub fn epsilon_random_rotation(h: f64, n_qubits: u32, tau_d: f64) -> Result<f64, BoundError> {
    if h <= -1.0 || n_qubits == 0 {
        return Err(BoundError::InvalidParameter("random rotations need h > -1 and n >= 1"));
    }
    if tau_d < 0.0 {
        return Err(BoundError::InvalidParameter("tau_d must be nonnegative"));
    }
    let floor = rotation_noise_level(h, n_qubits).powi(n_qubits as i32);
    if floor >= 1.0 {
        return Err(BoundError::InvalidParameter("floor tⁿ must stay below 1"));
    }
    Ok((tau_d / floor).ln_1p())
}

/// `ε_min = ½ ln(y_c / y_other)`, the largest ε the observed margin
/// certifies.
pub fn epsilon_min(y_c: f64, y_other: f64) -> Result<f64, BoundError> {
    if y_c < y_other {
        return Err(BoundError::Misclassified { y_c, y_other });
    }
    if y_other <= 0.0 {
        return if y_c > 0.0 { Ok(f64::INFINITY) } else { Err(BoundError::InvalidParameter("both probabilities are zero")) };
    }
    Ok(0.5 * (y_c / y_other).ln())
}

/// `τ_D = (e^{ε_min} − 1)·γ/α`; `+∞` when `α = 0` and `ε_min > 0`.
pub fn certified_radius(eps_min: f64, ag: AlphaGamma) -> f64 {
    if eps_min <= 0.0 {
        return 0.0;
    }
    if ag.alpha == 0.0 {
        return f64::INFINITY;
    }
    if eps_min.is_infinite() {
        return if ag.gamma > 0.0 { f64::INFINITY } else { 0.0 };
    }
    eps_min.exp_m1() * ag.gamma / ag.alpha
}

fn ordered_pair(y: &[f64]) -> Result<(f64, f64), BoundError> {
    match y {
        [a, b] => Ok(if a >= b { (*a, *b) } else { (*b, *a) }),
        _ => Err(BoundError::InvalidParameter("certification is defined for binary outputs")),
    }
}

/// `max(y)/min(y) > e^{2ε}` with `ε = epsilon_generic(ag, τ_D)`.
pub fn is_certified(y: &[f64], ag: AlphaGamma, tau_d: f64) -> Result<bool, BoundError> {
    let (hi, lo) = ordered_pair(y)?;
    let eps = match epsilon_generic(ag, tau_d) {
        Ok(e) => e,
        Err(BoundError::UnboundedEpsilon) => return Ok(false),
        Err(e) => return Err(e),
    };
    if lo <= 0.0 {
        return Ok(hi > 0.0);
    }
    // compared in log space: ½ ln B > ε
    Ok(0.5 * (hi / lo).ln() > eps)
}

/// Certification summary of one binary output.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificationResult {
    pub eps_min: f64,
    pub tau_cert: f64,
    /// `(τ_D, certified)` for each queried radius, in query order.
    pub certified_at: Vec<(f64, bool)>,
    /// `y_C − y_{k≠C}` for the predicted class `C`.
    pub y_gap: f64,
}

/// Certifies a binary output `y` against each radius in `taus`.
pub fn certify(y: &[f64], ag: AlphaGamma, taus: &[f64]) -> Result<CertificationResult, BoundError> {
    let (hi, lo) = ordered_pair(y)?;
    let eps_min = epsilon_min(hi, lo)?;
    let tau_cert = certified_radius(eps_min, ag);
    let certified_at = taus
        .iter()
        .map(|&t| Ok((t, is_certified(y, ag, t)?)))
        .collect::<Result<Vec<_>, BoundError>>()?;
    Ok(CertificationResult { eps_min, tau_cert, certified_at, y_gap: hi - lo })
}
