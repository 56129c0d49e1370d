use serde::{Deserialize, Serialize};

use super::rng::RngStream;
use crate::error::{Error, Result};

/// Sparsity level, signal level and noise level of one experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSpace {
    pub k: usize,
    pub tau: f64,
    pub sigma: f64,
}

impl ParamSpace {
    pub fn new(k: usize, tau: f64, sigma: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be >= 1".into()));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self { k, tau, sigma })
    }

    /// Signal-to-noise ratio tau / sigma.
    pub fn mu(&self) -> f64 {
        self.tau / self.sigma
    }

    /// Sparsity fraction k / p.
    pub fn eps(&self, p: usize) -> f64 {
        self.k as f64 / p as f64
    }

    /// `k * tau^2`, the squared-norm radius of the parameter set.
    pub fn energy(&self) -> f64 {
        self.k as f64 * self.tau * self.tau
    }

    /// Membership in the parameter set. The norm comparison allows for the
    /// rounding of a k-term sum, so a vector with k entries equal to `tau` is
    /// always a member.
    pub fn contains(&self, beta: &SignalVector) -> bool {
        let slack = 1.0 + 4.0 * f64::EPSILON * self.k as f64;
        beta.l0() <= self.k && beta.sq_norm() <= self.energy() * slack
    }
}

/// How signs are assigned to the nonzero coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignPattern {
    #[default]
    Positive,
    Symmetric,
}

/// Sparse coefficient vector: sorted support plus values on it.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalVector {
    p: usize,
    support: Vec<usize>,
    values: Vec<f64>,
}

impl SignalVector {
    pub fn new(p: usize, support: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if support.len() != values.len() {
            return Err(Error::DimensionMismatch {
                what: "signal values",
                expected: support.len(),
                got: values.len(),
            });
        }
        if !support.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument("support must be strictly increasing".into()));
        }
        if support.last().is_some_and(|&j| j >= p) {
            return Err(Error::InvalidArgument("support index out of range".into()));
        }
        Ok(Self { p, support, values })
    }

    pub fn zeros(p: usize) -> Self {
        Self {
            p,
            support: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_dense(dense: &[f64]) -> Self {
        let (support, values) = dense
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, v)| (j, *v))
            .unzip();
        Self {
            p: dense.len(),
            support,
            values,
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn l0(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }

    pub fn sq_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.p];
        for (&j, &v) in self.support.iter().zip(&self.values) {
            out[j] = v;
        }
        out
    }

    /// `||estimate - self||_2^2`.
    pub fn sq_error(&self, estimate: &[f64]) -> f64 {
        let mut total: f64 = estimate.iter().map(|v| v * v).sum();
        for (&j, &v) in self.support.iter().zip(&self.values) {
            let e = estimate[j];
            total += (e - v) * (e - v) - e * e;
        }
        total.max(0.0)
    }
}

/// Support drawn uniformly among k-subsets; every nonzero equals `tau`.
pub fn gen_signal(p: usize, space: &ParamSpace, rng: &mut RngStream) -> Result<SignalVector> {
    gen_signal_with(p, space, SignPattern::Positive, rng)
}

pub fn gen_signal_with(
    p: usize,
    space: &ParamSpace,
    signs: SignPattern,
    rng: &mut RngStream,
) -> Result<SignalVector> {
    if space.k > p {
        return Err(Error::InvalidArgument(format!("k = {} exceeds p = {p}", space.k)));
    }
    let support = rng.sample_subset(p, space.k);
    let values = support
        .iter()
        .map(|_| match signs {
            SignPattern::Positive => space.tau,
            SignPattern::Symmetric => {
                if rng.coin() {
                    space.tau
                } else {
                    -space.tau
                }
            }
        })
        .collect();
    Ok(SignalVector { p, support, values })
}
