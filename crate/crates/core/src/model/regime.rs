use serde::{Deserialize, Serialize};

use super::signal::ParamSpace;
use crate::error::{Error, Result};

/// `mu <= LOW_MU_CUTOFF` is labelled low SNR.
pub const LOW_MU_CUTOFF: f64 = 0.5;
/// `rho >= HIGH_RHO_CUTOFF` is labelled high SNR.
pub const HIGH_RHO_CUTOFF: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegimeLabel {
    Low,
    Medium,
    High,
}

/// Finite-sample SNR regime. `rho = mu / sqrt(log(p/k))`.
///
/// The cutoffs are heuristics for labelling experiments; no estimator reads them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnrRegime {
    pub rho: f64,
    pub label: RegimeLabel,
}

pub fn classify_regime(p: usize, space: &ParamSpace) -> Result<SnrRegime> {
    if p <= space.k {
        return Err(Error::InvalidArgument(format!(
            "regime needs p > k (p = {p}, k = {})",
            space.k
        )));
    }
    let mu = space.mu();
    let rho = mu / (p as f64 / space.k as f64).ln().sqrt();
    let label = if mu <= LOW_MU_CUTOFF {
        RegimeLabel::Low
    } else if rho >= HIGH_RHO_CUTOFF {
        RegimeLabel::High
    } else {
        RegimeLabel::Medium
    };
    Ok(SnrRegime { rho, label })
}
