//! Ridge, lasso, elastic net, best subset and the zero estimator, with the
//! SNR-aware default tunings and oracle grid search.
//!
//! Penalty conventions. Ridge and lasso minimise the half-scaled objective
//! `1/2 ||y - X b||^2 + pen(b)`:
//!
//! * ridge: `pen(b) = (lambda/2) ||b||^2`, so `b = (X^T X + lambda I)^{-1} X^T y`
//!   and `lambda` coincides with the weight in `||y - X b||^2 + lambda ||b||^2`;
//! * lasso: `pen(b) = lambda ||b||_1`, which is half the weight used with the
//!   un-halved sum of squares (see [`lasso::from_unhalved`]).
//!
//! The elastic net is the closed-form shrink-and-threshold rule
//! `eta(X^T y, lambda/2) / (1 + gamma)` and keeps its own `(lambda, gamma)`.

pub mod bss;
pub mod enet;
pub mod lasso;
pub mod oracle;
pub mod ridge;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DesignMatrix;

pub use crate::theory::soft_threshold;
pub use bss::{bss_fit, BssMode, DEFAULT_NODE_BUDGET};
pub use enet::{enet_default_tuning, enet_fit};
pub use lasso::{lasso_default_lambda, lasso_fit, lasso_fit_with, lasso_path, LassoOptions};
pub use oracle::{default_grid, oracle_tune};
pub use ridge::{ridge_default_lambda, ridge_fit, RidgePath};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "ridge")]
    Ridge,
    #[serde(rename = "lasso")]
    Lasso,
    #[serde(rename = "enet")]
    ElasticNet,
    #[serde(rename = "best-subset")]
    BestSubset,
    #[serde(rename = "zero")]
    Zero,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Ridge,
        Family::Lasso,
        Family::ElasticNet,
        Family::BestSubset,
        Family::Zero,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Ridge => "ridge",
            Family::Lasso => "lasso",
            Family::ElasticNet => "enet",
            Family::BestSubset => "best-subset",
            Family::Zero => "zero",
        }
    }

    pub fn from_name(name: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == name)
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    PaperFormula,
    OracleGrid,
    UserFixed,
}

/// Hyperparameters of one estimator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tuning {
    pub family: Family,
    /// Ridge weight, lasso weight or elastic-net l1 weight (see module docs).
    pub lambda: f64,
    /// Elastic-net l2 weight; zero for other families.
    pub gamma: f64,
    /// Best-subset cardinality.
    pub k: Option<usize>,
    pub provenance: Provenance,
}

impl Tuning {
    pub fn ridge(lambda: f64) -> Self {
        Self::with(Family::Ridge, lambda, 0.0, None)
    }

    pub fn lasso(lambda: f64) -> Self {
        Self::with(Family::Lasso, lambda, 0.0, None)
    }

    pub fn enet(lambda: f64, gamma: f64) -> Self {
        Self::with(Family::ElasticNet, lambda, gamma, None)
    }

    pub fn best_subset(k: usize) -> Self {
        Self::with(Family::BestSubset, 0.0, 0.0, Some(k))
    }

    pub fn zero() -> Self {
        Self::with(Family::Zero, 0.0, 0.0, None)
    }

    fn with(family: Family, lambda: f64, gamma: f64, k: Option<usize>) -> Self {
        Self {
            family,
            lambda,
            gamma,
            k,
            provenance: Provenance::UserFixed,
        }
    }

    pub fn provenance(self, provenance: Provenance) -> Self {
        Self { provenance, ..self }
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            )));
        }
        match self.family {
            Family::ElasticNet if !(1.0 + self.gamma > 0.0) => Err(Error::InvalidArgument(
                format!("elastic net needs 1 + gamma > 0, got gamma = {}", self.gamma),
            )),
            Family::BestSubset => match self.k {
                Some(k) if k >= 1 && k <= p => Ok(()),
                other => Err(Error::InvalidArgument(format!(
                    "best subset needs 1 <= k <= p = {p}, got {other:?}"
                ))),
            },
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certificate {
    /// Closed form, or exhaustive enumeration.
    Exact,
    /// Branch and bound finished without hitting its node budget.
    BranchAndBoundOptimal,
    /// Search stopped early; the best support found so far is returned.
    HeuristicOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub coefficients: Vec<f64>,
    /// Value of the family's objective at `coefficients`.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Stationarity violation for the lasso; zero for closed forms.
    pub kkt_residual: f64,
    /// Set for closed forms and best subset, `None` for iterative solvers.
    pub certificate: Option<Certificate>,
}

impl Estimate {
    pub(crate) fn closed_form(coefficients: Vec<f64>, objective: f64) -> Self {
        Self {
            coefficients,
            objective,
            iterations: 0,
            converged: true,
            kkt_residual: 0.0,
            certificate: Some(Certificate::Exact),
        }
    }

    pub fn support(&self) -> Vec<usize> {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, b)| **b != 0.0)
            .map(|(j, _)| j)
            .collect()
    }
}

/// All-zero coefficients.
pub fn zero_fit(p: usize) -> Estimate {
    Estimate::closed_form(vec![0.0; p], 0.0)
}

/// Solver settings shared by [`fit`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    pub lasso_tol: f64,
    pub lasso_max_iter: usize,
    pub bss_mode: BssMode,
    pub bss_budget: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            lasso_tol: 1e-7,
            lasso_max_iter: 10_000,
            bss_mode: BssMode::BranchAndBound,
            bss_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

/// Fit the estimator described by `tuning`.
pub fn fit(x: &DesignMatrix, y: &[f64], tuning: &Tuning, opts: &FitOptions) -> Result<Estimate> {
    check_response(x, y)?;
    tuning.validate(x.p())?;
    match tuning.family {
        Family::Ridge => ridge_fit(x, y, tuning.lambda),
        Family::Lasso => lasso_fit(x, y, tuning.lambda, opts.lasso_tol, opts.lasso_max_iter),
        Family::ElasticNet => enet_fit(x, y, tuning.lambda, tuning.gamma),
        Family::BestSubset => bss_fit(
            x,
            y,
            tuning.k.unwrap_or(1),
            opts.bss_mode,
            opts.bss_budget,
        ),
        Family::Zero => Ok(zero_fit(x.p())),
    }
}

pub(crate) fn check_response(x: &DesignMatrix, y: &[f64]) -> Result<()> {
    if y.len() != x.n() {
        return Err(Error::DimensionMismatch {
            what: "response length vs design rows",
            expected: x.n(),
            got: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("response must be finite".into()));
    }
    Ok(())
}

pub(crate) fn half_rss(x: &DesignMatrix, y: &[f64], b: &[f64]) -> f64 {
    let fit = x.mul_vec(b);
    0.5 * y.iter().zip(fit).map(|(a, f)| (a - f) * (a - f)).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_fit_examples() {
        let z = zero_fit(3);
        assert_eq!(z.coefficients, vec![0.0; 3]);
        let beta = crate::model::SignalVector::new(3, vec![0, 2], vec![1.5, 1.5]).unwrap();
        assert_eq!(beta.sq_error(&z.coefficients), 2.0 * 1.5 * 1.5);
        assert_eq!(crate::model::SignalVector::zeros(3).sq_error(&z.coefficients), 0.0);
    }

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(Family::from_name(f.name()), Some(f));
        }
        assert_eq!(Family::from_name("ols"), None);
    }

    #[test]
    fn tuning_validation() {
        assert!(Tuning::enet(1.0, -1.0).validate(5).is_err());
        assert!(Tuning::enet(1.0, -0.5).validate(5).is_ok());
        assert!(Tuning::best_subset(6).validate(5).is_err());
        assert!(Tuning::ridge(-1.0).validate(5).is_err());
    }
}
