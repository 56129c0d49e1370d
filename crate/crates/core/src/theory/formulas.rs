//! Leading-order and second-order minimax risk approximations.
//!
//! All asymptotic `o(1)` terms are dropped. Whenever a second-order correction
//! reaches the size of the leading term the value is still returned but
//! flagged as outside the formula's range of validity.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::normal::pdf;
use crate::error::{Error, Result};
use crate::model::{classify_regime, ParamSpace, RegimeLabel, SnrRegime};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormulaValue {
    pub value: f64,
    /// False when the dropped terms cannot be small (correction >= 1).
    pub valid: bool,
}

fn check_p(p: usize, space: &ParamSpace) -> Result<()> {
    if p <= space.k {
        return Err(Error::InvalidArgument(format!(
            "need p > k (p = {p}, k = {})",
            space.k
        )));
    }
    Ok(())
}

/// `k tau^2` below the high-SNR regime, `2 sigma^2 k log(p/k)` within it.
pub fn minimax_first_order(p: usize, space: &ParamSpace, regime: &SnrRegime) -> Result<f64> {
    check_p(p, space)?;
    Ok(match regime.label {
        RegimeLabel::Low | RegimeLabel::Medium => space.energy(),
        RegimeLabel::High => high_snr_risk(p, space),
    })
}

/// `2 sigma^2 k log(p/k)`.
pub fn high_snr_risk(p: usize, space: &ParamSpace) -> f64 {
    2.0 * space.sigma * space.sigma * space.k as f64 * (p as f64 / space.k as f64).ln()
}

/// Low-SNR second-order risk, attained by ridge with `lambda = p sigma^2 / (k tau^2)`.
pub fn ridge_second_order_risk(p: usize, space: &ParamSpace) -> Result<FormulaValue> {
    if p == 0 {
        return Err(Error::InvalidArgument("p must be positive".into()));
    }
    let correction = space.energy() / (p as f64 * space.sigma * space.sigma);
    Ok(FormulaValue {
        value: space.energy() * (1.0 - correction),
        valid: correction < 1.0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnetBounds {
    /// Minimax lower bound.
    pub lower: FormulaValue,
    /// Worst-case risk bound of the tuned elastic net.
    pub upper: FormulaValue,
}

/// Moderate-SNR bounds:
/// lower `k tau^2 (1 - (k/2p) e^{mu^2})`,
/// upper `k tau^2 (1 - (2/sqrt(2 pi)) (k/p) mu^{-1} e^{mu^2})`.
pub fn enet_second_order_bounds(p: usize, space: &ParamSpace) -> Result<EnetBounds> {
    check_p(p, space)?;
    let mu = space.mu();
    let ratio = space.k as f64 / p as f64;
    let growth = (mu * mu).exp();
    let lower_corr = 0.5 * ratio * growth;
    let upper_corr = 2.0 / (2.0 * PI).sqrt() * ratio * growth / mu;
    let energy = space.energy();
    Ok(EnetBounds {
        lower: FormulaValue {
            value: energy * (1.0 - lower_corr),
            valid: lower_corr < 1.0,
        },
        upper: FormulaValue {
            value: energy * (1.0 - upper_corr),
            valid: upper_corr < 1.0,
        },
    })
}

/// Worst-case risk of the zero estimator over the parameter set.
pub fn zero_estimator_risk(space: &ParamSpace) -> f64 {
    space.energy()
}

/// Alternating Mills-ratio envelopes `(Phi~_{2o+1}(x), Phi~_{2o}(x))` around `1 - Phi(x)`,
/// where `Phi~_l(x) = phi(x)/x * sum_{j<=l} (-1)^j (2j-1)!! / x^{2j}`.
pub fn gaussian_tail_bounds(x: f64, order: usize) -> Result<(f64, f64)> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::InvalidArgument(format!("tail bound needs x > 0, got {x}")));
    }
    let inv_sq = 1.0 / (x * x);
    let mut term = 1.0;
    let mut partial = Vec::with_capacity(2 * order + 2);
    let mut sum = 0.0;
    for j in 0..=(2 * order + 1) {
        if j > 0 {
            term *= -((2 * j - 1) as f64) * inv_sq;
        }
        sum += term;
        partial.push(sum);
    }
    let scale = pdf(x) / x;
    Ok((scale * partial[2 * order + 1], scale * partial[2 * order]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FormulaId {
    FirstOrderI,
    FirstOrderII,
    FirstOrderIII,
    RidgeSecondOrder,
    EnetLower,
    EnetUpper,
    ZeroEstimator,
}

impl FormulaId {
    pub const ALL: [FormulaId; 7] = [
        FormulaId::FirstOrderI,
        FormulaId::FirstOrderII,
        FormulaId::FirstOrderIII,
        FormulaId::RidgeSecondOrder,
        FormulaId::EnetLower,
        FormulaId::EnetUpper,
        FormulaId::ZeroEstimator,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FormulaId::FirstOrderI => "first-order-low",
            FormulaId::FirstOrderII => "first-order-medium",
            FormulaId::FirstOrderIII => "first-order-high",
            FormulaId::RidgeSecondOrder => "ridge-second-order",
            FormulaId::EnetLower => "enet-lower",
            FormulaId::EnetUpper => "enet-upper",
            FormulaId::ZeroEstimator => "zero",
        }
    }
}

/// Risk normalized by `k tau^2` along a grid of `1/SNR` values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskCurve {
    pub formula: FormulaId,
    /// `(inv_snr, risk / (k tau^2))`, sorted by `inv_snr`.
    pub points: Vec<(f64, f64)>,
}

/// Evaluate one formula along `sigma = tau * inv_snr`.
pub fn risk_curve(
    formula: FormulaId,
    p: usize,
    k: usize,
    tau: f64,
    inv_snr_grid: &[f64],
) -> Result<RiskCurve> {
    let mut grid = inv_snr_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let mut points = Vec::with_capacity(grid.len());
    for inv in grid {
        let space = ParamSpace::new(k, tau, tau * inv)?;
        let risk = match formula {
            FormulaId::FirstOrderI | FormulaId::FirstOrderII | FormulaId::ZeroEstimator => {
                space.energy()
            }
            FormulaId::FirstOrderIII => high_snr_risk(p, &space),
            FormulaId::RidgeSecondOrder => ridge_second_order_risk(p, &space)?.value,
            FormulaId::EnetLower => enet_second_order_bounds(p, &space)?.lower.value,
            FormulaId::EnetUpper => enet_second_order_bounds(p, &space)?.upper.value,
        };
        points.push((inv, (risk / space.energy()).max(0.0)));
    }
    Ok(RiskCurve { formula, points })
}

/// First-order value using the regime classification of `(p, space)`.
pub fn minimax_first_order_auto(p: usize, space: &ParamSpace) -> Result<(SnrRegime, f64)> {
    let regime = classify_regime(p, space)?;
    let value = minimax_first_order(p, space, &regime)?;
    Ok((regime, value))
}
