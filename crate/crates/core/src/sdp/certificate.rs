//! Empirical checks of solved channels: trace-distance contraction and
//! outcome floors over random states.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::SdpError;
use crate::channels::{apply_to_matrix, ChoiMatrix};
use crate::consts::SDP_PSD_TOL;
use crate::qmat::{self, trace_distance, CMatrix, C64};
use crate::random;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionReport {
    /// `max τ(E(σ), E(ρ)) / τ(σ, ρ)` over the sampled pairs.
    pub max_ratio: f64,
    /// `1 − κ`.
    pub bound: f64,
    pub trials: usize,
    pub pass: bool,
}

/// Samples `trials` random state pairs and measures how much the channel
/// contracts their trace distance. A channel with `J − (κ/d) I ⪰ 0` must
/// contract by at least `1 − κ`; this is checked with slack `1e-7`.
pub fn verify_contraction_certificate(j: &ChoiMatrix, kappa: f64, trials: usize, seed: u64) -> Result<ContractionReport, SdpError> {
    let d = j.dim();
    let mut shifted = j.matrix().clone();
    for i in 0..d * d {
        shifted[(i, i)] -= C64::new(kappa / d as f64, 0.0);
    }
    let min_eigenvalue = qmat::min_eigenvalue(&shifted.hermitian_part())?;
    if min_eigenvalue < -SDP_PSD_TOL {
        return Err(SdpError::CertificatePrecondition { min_eigenvalue });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio = 0.0f64;
    for _ in 0..trials {
        let (sigma, rho) = random_pair(&mut rng, d)?;
        let before = trace_distance(&sigma, &rho)?;
        let after = trace_distance(&apply_to_matrix(j, &sigma), &apply_to_matrix(j, &rho))?;
        max_ratio = max_ratio.max(after / before);
    }
    let bound = 1.0 - kappa;
    Ok(ContractionReport { max_ratio, bound, trials, pass: max_ratio <= bound + 1e-7 })
}

fn random_pair(rng: &mut ChaCha8Rng, d: usize) -> Result<(CMatrix, CMatrix), SdpError> {
    loop {
        let sigma = random::density_matrix(rng, d);
        let rho = random::density_matrix(rng, d);
        if trace_distance(&sigma, &rho)? > 1e-6 {
            return Ok((sigma, rho));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefinitionProbe {
    /// Smallest `Tr[P_k E(ρ)]` seen over outcomes and sampled states.
    pub min_floor: f64,
    /// Largest sampled contraction ratio.
    pub max_contraction: f64,
}

/// Measures the outcome floor against `effects` and the contraction ratio
/// over `trials` random states and state pairs.
pub fn probe_definition(j: &ChoiMatrix, effects: &[CMatrix], kappa: f64, trials: usize, seed: u64) -> Result<DefinitionProbe, SdpError> {
    let d = j.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_floor = f64::INFINITY;
    for _ in 0..trials {
        let rho = random::density_matrix(&mut rng, d);
        let out = apply_to_matrix(j, &rho);
        for p in effects {
            min_floor = min_floor.min(p.trace_of_product(&out).re);
        }
    }
    let contraction = verify_contraction_certificate(j, kappa, trials, seed.wrapping_add(1))?;
    Ok(DefinitionProbe { min_floor, max_contraction: contraction.max_ratio })
}
