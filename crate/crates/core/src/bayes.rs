//! Numerical checks of the single-spike lower-bound construction.
//!
//! Under the prior `beta = lambda e_I` with `I` uniform on `m` coordinates,
//! the posterior puts mass `p_i ∝ exp(lambda X_i^T y - lambda^2 ||X_i||^2 / 2)`
//! on coordinate `i`. Everything here is evaluated in the log domain since
//! the exponents grow linearly in `n`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{gen_design, DesignMatrix, RngStream, SignalVector};
use crate::stats::{mean_se, median, MeanSe};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpikePriorConfig {
    /// Number of candidate coordinates in the block.
    pub m: usize,
    /// Spike height.
    pub lambda: f64,
    /// Draw the sign of the spike uniformly instead of always `+`.
    pub symmetric: bool,
}

impl SpikePriorConfig {
    pub fn new(m: usize, lambda: f64, symmetric: bool) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("spike prior needs m >= 1".into()));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("spike height must be > 0, got {lambda}")));
        }
        Ok(Self { m, lambda, symmetric })
    }

    /// `lambda = c * sqrt(2 log m)`.
    pub fn scaled(m: usize, c: f64, symmetric: bool) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidArgument("scaled spike height needs m >= 2".into()));
        }
        Self::new(m, c * (2.0 * (m as f64).ln()).sqrt(), symmetric)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorDiagnostics {
    /// Posterior probability that coordinate `i` carries the spike.
    pub p: Vec<f64>,
    /// Posterior mean divided by `lambda`. Equals `p` for the one-sided prior.
    pub mean_weight: Vec<f64>,
    /// `A_{n,m}`, set only by [`spike_diagnostics`].
    pub a: Option<f64>,
    /// `log B_{n,m}`, set only by [`spike_diagnostics`].
    pub log_b: Option<f64>,
}

/// `k` blocks of size `p / k`, the last one absorbing the remainder, each
/// with a single uniformly placed entry `±lambda`.
pub fn block_prior_sample(
    p: usize,
    k: usize,
    lambda: f64,
    symmetric: bool,
    rng: &mut RngStream,
) -> Result<SignalVector> {
    if k == 0 || k > p {
        return Err(Error::InvalidArgument(format!("block prior needs 1 <= k <= p, got k={k}, p={p}")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("spike height must be > 0, got {lambda}")));
    }
    let m = p / k;
    let mut support = Vec::with_capacity(k);
    let mut values = Vec::with_capacity(k);
    for b in 0..k {
        let start = b * m;
        let len = if b + 1 == k { p - start } else { m };
        support.push(start + rng.below(len as u64) as usize);
        let sign = if symmetric && rng.coin() { -1.0 } else { 1.0 };
        values.push(sign * lambda);
    }
    SignalVector::new(p, support, values)
}

fn check_len(x: &DesignMatrix, v: &[f64], what: &'static str) -> Result<()> {
    if v.len() != x.n() {
        return Err(Error::DimensionMismatch { what, expected: x.n(), got: v.len() });
    }
    Ok(())
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + v.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Exact posterior of the single-spike prior given `y`.
///
/// The symmetric prior adds the mirrored term `exp(-lambda X_i^T y - ...)`
/// to each weight, and the posterior mean becomes the signed difference.
pub fn spike_posterior(
    y: &[f64],
    x: &DesignMatrix,
    lambda: f64,
    symmetric: bool,
) -> Result<PosteriorDiagnostics> {
    check_len(x, y, "response length")?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("spike height must be >= 0, got {lambda}")));
    }
    let m = x.p();
    if m == 0 {
        return Err(Error::InvalidArgument("posterior needs at least one column".into()));
    }
    let xty = x.tr_mul_vec(y);
    let norms = x.column_sq_norms();
    let pen: Vec<f64> = norms.iter().map(|s| 0.5 * lambda * lambda * s).collect();
    let plus: Vec<f64> = (0..m).map(|i| lambda * xty[i] - pen[i]).collect();
    if !symmetric {
        let lse = log_sum_exp(&plus);
        let p: Vec<f64> = plus.iter().map(|t| (t - lse).exp()).collect();
        return Ok(PosteriorDiagnostics { mean_weight: p.clone(), p, a: None, log_b: None });
    }
    let minus: Vec<f64> = (0..m).map(|i| -lambda * xty[i] - pen[i]).collect();
    let all: Vec<f64> = plus.iter().chain(&minus).copied().collect();
    let lse = log_sum_exp(&all);
    let mut p = Vec::with_capacity(m);
    let mut w = Vec::with_capacity(m);
    for i in 0..m {
        let (a, b) = ((plus[i] - lse).exp(), (minus[i] - lse).exp());
        p.push(a + b);
        w.push(a - b);
    }
    // pairing the two halves can leave the sum an ulp off one
    let total: f64 = p.iter().sum();
    for (pi, wi) in p.iter_mut().zip(&mut w) {
        *pi = (*pi / total).min(1.0);
        *wi /= total;
    }
    Ok(PosteriorDiagnostics { p, mean_weight: w, a: None, log_b: None })
}

/// `(A, log B)` for data `y = lambda X_1 + z`, with `X_1` the first column.
///
/// With `b = (m-1)(1 + lambda^2/n)^{-n/2} exp(lambda^2 ||y||^2 / (2(n + lambda^2)))`,
/// `A = sum_{i>=2} exp(lambda X_i^T y - lambda^2 ||X_i||^2 / 2) / b` and
/// `B = b / exp(lambda^2 ||X_1||^2 / 2 + lambda X_1^T z)`, so that
/// `p_1 = 1 / (1 + A B)`.
pub fn ab_diagnostics(x: &DesignMatrix, z: &[f64], lambda: f64) -> Result<(f64, f64)> {
    check_len(x, z, "noise length")?;
    let (n, m) = (x.n(), x.p());
    if m < 2 {
        return Err(Error::InvalidArgument("A/B diagnostics need m >= 2".into()));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("spike height must be >= 0, got {lambda}")));
    }
    let x1 = x.column(0);
    let y: Vec<f64> = x1.iter().zip(z).map(|(a, b)| lambda * a + b).collect();
    let y_sq: f64 = y.iter().map(|v| v * v).sum();
    let l2 = lambda * lambda;
    let nf = n as f64;
    let log_b_small = ((m - 1) as f64).ln() - 0.5 * nf * (l2 / nf).ln_1p() + l2 * y_sq / (2.0 * (nf + l2));
    let terms: Vec<f64> = (1..m)
        .map(|i| {
            let c = x.column(i);
            let cy: f64 = c.iter().zip(&y).map(|(a, b)| a * b).sum();
            let cc: f64 = c.iter().map(|v| v * v).sum();
            lambda * cy - 0.5 * l2 * cc
        })
        .collect();
    let a = (log_sum_exp(&terms) - log_b_small).exp();
    let x1_sq: f64 = x1.iter().map(|v| v * v).sum();
    let x1z: f64 = x1.iter().zip(z).map(|(a, b)| a * b).sum();
    let log_b = log_b_small - (0.5 * l2 * x1_sq + lambda * x1z);
    Ok((a, log_b))
}

/// Posterior and `(A, log B)` together for data `y = lambda X_1 + z`.
pub fn spike_diagnostics(x: &DesignMatrix, z: &[f64], lambda: f64) -> Result<PosteriorDiagnostics> {
    check_len(x, z, "noise length")?;
    let y: Vec<f64> = x.column(0).iter().zip(z).map(|(a, b)| lambda * a + b).collect();
    let mut post = spike_posterior(&y, x, lambda, false)?;
    let (a, log_b) = ab_diagnostics(x, z, lambda)?;
    post.a = Some(a);
    post.log_b = Some(log_b);
    Ok(post)
}

/// Monte-Carlo Bayes risk of the posterior mean under the spike prior.
///
/// Trial `t` uses `rng.substream(t)`; the result does not depend on the
/// number of worker threads.
pub fn bayes_risk_mc(config: &SpikePriorConfig, n: usize, trials: usize, rng: &RngStream) -> Result<MeanSe> {
    if trials < 2 {
        return Err(Error::InvalidArgument("bayes risk needs at least two trials".into()));
    }
    SpikePriorConfig::new(config.m, config.lambda, config.symmetric)?;
    let losses: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let mut r = rng.substream(t);
            let x = gen_design(n, config.m, &mut r)?;
            let beta = block_prior_sample(config.m, 1, config.lambda, config.symmetric, &mut r)?;
            let mut y = x.mul_vec(&beta.to_dense());
            for v in &mut y {
                *v += r.standard_normal();
            }
            let post = spike_posterior(&y, &x, config.lambda, config.symmetric)?;
            let est: Vec<f64> = post.mean_weight.iter().map(|w| config.lambda * w).collect();
            Ok(beta.sq_error(&est))
        })
        .collect::<Result<_>>()?;
    Ok(mean_se(&losses))
}

/// Summary of repeated draws under `beta = lambda e_1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpikeSummary {
    pub p1: Vec<f64>,
    pub a: Vec<f64>,
    pub log_b: Vec<f64>,
}

impl SpikeSummary {
    pub fn median_p1(&self) -> f64 {
        median(&self.p1)
    }

    pub fn mean_a(&self) -> MeanSe {
        mean_se(&self.a)
    }

    /// Fraction of trials with `log B >= threshold`.
    pub fn frac_log_b_at_least(&self, threshold: f64) -> f64 {
        self.log_b.iter().filter(|&&v| v >= threshold).count() as f64 / self.log_b.len() as f64
    }
}

/// Run `trials` independent draws of `(X, z)` with the spike on the first coordinate.
pub fn spike_trials(n: usize, m: usize, lambda: f64, trials: usize, rng: &RngStream) -> Result<SpikeSummary> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let rows: Vec<(f64, f64, f64)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<(f64, f64, f64)> {
            let mut r = rng.substream(t);
            let x = gen_design(n, m, &mut r)?;
            let z: Vec<f64> = (0..n).map(|_| r.standard_normal()).collect();
            let d = spike_diagnostics(&x, &z, lambda)?;
            Ok((d.p[0], d.a.unwrap_or(f64::NAN), d.log_b.unwrap_or(f64::NAN)))
        })
        .collect::<Result<_>>()?;
    Ok(SpikeSummary {
        p1: rows.iter().map(|r| r.0).collect(),
        a: rows.iter().map(|r| r.1).collect(),
        log_b: rows.iter().map(|r| r.2).collect(),
    })
}
