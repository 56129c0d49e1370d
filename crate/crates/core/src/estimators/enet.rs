use super::{check_response, Estimate, Provenance, Tuning};
use crate::error::{Error, Result};
use crate::model::{DesignMatrix, ParamSpace};
use crate::theory::soft_threshold;

/// Elastic-net rule `eta(X^T y, lambda/2) / (1 + gamma)`.
///
/// This is the exact minimiser of the separable objective
/// `||X^T y - b||^2 + lambda ||b||_1 + gamma ||b||^2`, reported as `objective`.
pub fn enet_fit(x: &DesignMatrix, y: &[f64], lambda: f64, gamma: f64) -> Result<Estimate> {
    check_response(x, y)?;
    enet_from_correlations(&x.tr_mul_vec(y), lambda, gamma)
}

/// Same rule applied to precomputed `X^T y`.
pub fn enet_from_correlations(xty: &[f64], lambda: f64, gamma: f64) -> Result<Estimate> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("enet lambda must be >= 0, got {lambda}")));
    }
    if !(1.0 + gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("enet needs 1 + gamma > 0, got gamma = {gamma}")));
    }
    let shrink = 1.0 / (1.0 + gamma);
    let b: Vec<f64> = xty.iter().map(|&u| shrink * soft_threshold(u, 0.5 * lambda)).collect();
    let objective = xty
        .iter()
        .zip(&b)
        .map(|(u, v)| (u - v) * (u - v) + lambda * v.abs() + gamma * v * v)
        .sum();
    Ok(Estimate::closed_form(b, objective))
}

/// `lambda = 4 tau`, `gamma = (p sigma^2 / (2 k tau^2)) exp(-3 tau^2 / (2 sigma^2)) - 1`.
///
/// Fails with [`Error::RegimeMismatch`] when the formula gives `gamma <= 0`,
/// which happens once `mu` is moderately large relative to `log(p/k)`.
pub fn enet_default_tuning(p: usize, space: &ParamSpace) -> Result<Tuning> {
    let mu = space.mu();
    let gamma = p as f64 * space.sigma * space.sigma / (2.0 * space.energy())
        * (-1.5 * mu * mu).exp()
        - 1.0;
    if !(gamma > 0.0) {
        return Err(Error::RegimeMismatch { gamma });
    }
    Ok(Tuning::enet(4.0 * space.tau, gamma).provenance(Provenance::PaperFormula))
}
