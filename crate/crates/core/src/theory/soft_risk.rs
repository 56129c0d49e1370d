//! Risk of the shrunken soft-thresholding estimator `eta(u + e, chi1) / (1 + chi2)`
//! under Gaussian and scale-mixture-of-Gaussian noise.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::gamma::ln_gamma;

use super::normal::{partial_moment1, partial_moment2};
use super::quadrature::gauss_legendre;
use crate::error::{Error, Result};

/// Mass left outside the quadrature range on each side.
pub const MIXTURE_TAIL_MASS: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoftRiskParams {
    /// Threshold.
    pub chi1: f64,
    /// Shrinkage: the thresholded value is divided by `1 + chi2`.
    pub chi2: f64,
    /// Noise standard deviation.
    pub noise_sd: f64,
}

impl SoftRiskParams {
    pub fn new(chi1: f64, chi2: f64, noise_sd: f64) -> Result<Self> {
        if !(chi1 >= 0.0 && chi1.is_finite()) {
            return Err(Error::InvalidArgument(format!("chi1 must be >= 0, got {chi1}")));
        }
        if !(1.0 + chi2 > 0.0) {
            return Err(Error::InvalidArgument(format!("need 1 + chi2 > 0, got chi2 = {chi2}")));
        }
        if !(noise_sd > 0.0 && noise_sd.is_finite()) {
            return Err(Error::InvalidArgument(format!("noise_sd must be > 0, got {noise_sd}")));
        }
        Ok(Self {
            chi1,
            chi2,
            noise_sd,
        })
    }

    pub fn with_noise_sd(self, noise_sd: f64) -> Self {
        Self { noise_sd, ..self }
    }
}

/// Soft thresholding `sign(u) (|u| - chi)_+`.
pub fn soft_threshold(u: f64, chi: f64) -> f64 {
    debug_assert!(chi >= 0.0);
    if u > chi {
        u - chi
    } else if u < -chi {
        u + chi
    } else {
        0.0
    }
}

/// `E(eta(u + e, chi1)/(1 + chi2) - u)^2` with `e ~ N(0, noise_sd^2)`, in closed form.
pub fn soft_risk(u: f64, params: &SoftRiskParams) -> f64 {
    let s = params.noise_sd;
    let a = 1.0 / (1.0 + params.chi2);
    let d_plus = (u - params.chi1) / s;
    let d_minus = (-u - params.chi1) / s;
    // E eta = E(X - chi)_+ - E(-X - chi)_+, E eta^2 = sum of squared parts
    let mean_eta = s * (partial_moment1(d_plus) - partial_moment1(d_minus));
    let second_eta = s * s * (partial_moment2(d_plus) + partial_moment2(d_minus));
    (a * a * second_eta - 2.0 * a * u * mean_eta + u * u).max(0.0)
}

/// Maximum of `r(x) + r(y)` over the circle `x^2 + y^2 = c^2`, attained at `x = y`.
pub fn worst_pair_risk(c: f64, params: &SoftRiskParams) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {c}")));
    }
    Ok(2.0 * soft_risk(c / std::f64::consts::SQRT_2, params))
}

/// Quadrature rule over `V = chi^2_n / n`, returned as `(v, weight)` pairs whose
/// weights sum to one.
///
/// The integration variable is the Wilson-Hilferty coordinate
/// `w = (V^{1/3} - m) / s`, in which the density is close to Gaussian, and the
/// range covers the `MIXTURE_TAIL_MASS` and `1 - MIXTURE_TAIL_MASS` quantiles.
pub fn chi2_mean_rule(n: usize, nodes: usize) -> Result<Vec<(f64, f64)>> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("mixture needs n >= 3, got {n}")));
    }
    if nodes == 0 {
        return Err(Error::InvalidArgument("need at least one quadrature node".into()));
    }
    let nf = n as f64;
    let dist = ChiSquared::new(nf).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let v_lo = dist.inverse_cdf(MIXTURE_TAIL_MASS) / nf;
    let v_hi = dist.inverse_cdf(1.0 - MIXTURE_TAIL_MASS) / nf;
    let m = 1.0 - 2.0 / (9.0 * nf);
    let s = (2.0 / (9.0 * nf)).sqrt();
    let w_lo = (v_lo.cbrt() - m) / s;
    let w_hi = (v_hi.cbrt() - m) / s;

    let half_n = 0.5 * nf;
    let log_norm = half_n * 2f64.ln() + ln_gamma(half_n);
    let log_density_v = |v: f64| {
        let x = nf * v;
        nf.ln() + (half_n - 1.0) * x.ln() - 0.5 * x - log_norm
    };

    let (xs, ws) = gauss_legendre(nodes);
    let half = 0.5 * (w_hi - w_lo);
    let mid = 0.5 * (w_hi + w_lo);
    let mut rule: Vec<(f64, f64)> = xs
        .iter()
        .zip(&ws)
        .map(|(x, gw)| {
            let w = mid + half * x;
            let root = m + s * w;
            let v = root * root * root;
            let jacobian = 3.0 * s * root * root;
            (v, gw * half * jacobian * log_density_v(v).exp())
        })
        .collect();
    let total: f64 = rule.iter().map(|(_, w)| w).sum();
    for entry in rule.iter_mut() {
        entry.1 /= total;
    }
    Ok(rule)
}

/// Risk under scale-mixture noise `omega | theta ~ N(0, sigma_theta^2)` with
/// `sigma_theta^2 = noise_sd^2 * ||theta||^2`, `theta ~ N(0, I_n / n)`.
///
/// Evaluated as `E[sigma_theta^2 r(u / sigma_theta; chi1 / sigma_theta, chi2)]`,
/// i.e. the Gaussian risk at noise level `sigma_theta`, averaged by quadrature.
pub fn mixture_soft_risk(
    u: f64,
    params: &SoftRiskParams,
    n: usize,
    quad_nodes: usize,
) -> Result<f64> {
    let rule = chi2_mean_rule(n, quad_nodes)?;
    Ok(rule
        .iter()
        .map(|&(v, w)| w * soft_risk(u, &params.with_noise_sd(params.noise_sd * v.sqrt())))
        .sum())
}
