use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{bss::binomial, BssMode, Family, FitOptions, Tuning};
use crate::model::SignPattern;

/// How each estimator's tuning parameters are chosen at a grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TuningMode {
    /// SNR-aware closed-form choices.
    Paper,
    /// Best grid point on a pilot batch drawn from disjoint streams.
    #[default]
    Oracle,
}

/// Explicit tuning grids. Missing entries fall back to the default grids.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub ridge: Option<Vec<f64>>,
    pub lasso: Option<Vec<f64>>,
    /// Elastic-net grid is the product `enet_lambda x enet_gamma`.
    pub enet_lambda: Option<Vec<f64>>,
    pub enet_gamma: Option<Vec<f64>>,
}

/// One MSE-versus-SNR sweep. `sigma = tau * inv_snr` at each grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub tau: f64,
    pub inv_snr_grid: Vec<f64>,
    /// Evaluation trials per grid point. Oracle pilots are drawn on top of these.
    pub trials: usize,
    pub estimators: Vec<Family>,
    #[serde(default)]
    pub tuning_mode: TuningMode,
    pub master_seed: u64,
    #[serde(default)]
    pub signs: SignPattern,
    #[serde(default = "default_pilot_fraction")]
    pub pilot_fraction: f64,
    /// `epsilon` in the lasso formula `(1 + epsilon) sigma sqrt(2 log(p/k))`.
    #[serde(default)]
    pub lasso_eps: f64,
    #[serde(default)]
    pub grids: GridConfig,
    #[serde(default)]
    pub solver: FitOptions,
}

fn default_pilot_fraction() -> f64 {
    0.25
}

/// Above this many candidate supports a best-subset fit must be certified by
/// branch and bound; uncertified fits are skipped.
pub const BSS_EXHAUSTIVE_LIMIT: u128 = 1_000_000;

impl SweepConfig {
    /// Minimal config with default grids and solver settings.
    pub fn new(
        n: usize,
        p: usize,
        k: usize,
        tau: f64,
        inv_snr_grid: Vec<f64>,
        trials: usize,
        estimators: Vec<Family>,
        master_seed: u64,
    ) -> Self {
        Self {
            n,
            p,
            k,
            tau,
            inv_snr_grid,
            trials,
            estimators,
            tuning_mode: TuningMode::default(),
            master_seed,
            signs: SignPattern::default(),
            pilot_fraction: default_pilot_fraction(),
            lasso_eps: 0.0,
            grids: GridConfig::default(),
            solver: FitOptions::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Pilot datasets per grid point in oracle mode.
    pub fn pilot_trials(&self) -> usize {
        ((self.trials as f64 * self.pilot_fraction).ceil() as usize).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n == 0 || self.p == 0 || self.k == 0 {
            return bad("n, p and k must be positive".into());
        }
        if self.k > self.p {
            return bad(format!("k = {} exceeds p = {}", self.k, self.p));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if self.inv_snr_grid.is_empty() {
            return bad("inv_snr_grid is empty".into());
        }
        if self.inv_snr_grid.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return bad("inv_snr_grid entries must be finite and >= 0".into());
        }
        if self.inv_snr_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("inv_snr_grid must be strictly ascending".into());
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if self.estimators.is_empty() {
            return bad("no estimators selected".into());
        }
        let distinct: BTreeSet<Family> = self.estimators.iter().copied().collect();
        if distinct.len() != self.estimators.len() {
            return bad("estimators listed twice".into());
        }
        if !(self.pilot_fraction > 0.0 && self.pilot_fraction <= 1.0) {
            return bad(format!("pilot_fraction must be in (0, 1], got {}", self.pilot_fraction));
        }
        if !(self.lasso_eps >= 0.0 && self.lasso_eps.is_finite()) {
            return bad("lasso_eps must be >= 0".into());
        }
        if self.master_seed > i64::MAX as u64 {
            return bad("master_seed must fit in a signed 64-bit integer".into());
        }
        let g = &self.grids;
        for (name, grid) in [("ridge", &g.ridge), ("lasso", &g.lasso), ("enet_lambda", &g.enet_lambda)] {
            if let Some(v) = grid {
                if v.is_empty() || v.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
                    return bad(format!("grids.{name} must be nonempty and >= 0"));
                }
            }
        }
        if let Some(v) = &g.enet_gamma {
            if v.is_empty() || v.iter().any(|x| !(1.0 + x > 0.0 && x.is_finite())) {
                return bad("grids.enet_gamma must be nonempty with 1 + gamma > 0".into());
            }
        }
        if g.enet_lambda.is_some() != g.enet_gamma.is_some() {
            return bad("grids.enet_lambda and grids.enet_gamma go together".into());
        }
        if !(self.solver.lasso_tol > 0.0) || self.solver.lasso_max_iter == 0 {
            return bad("solver.lasso_tol and solver.lasso_max_iter must be positive".into());
        }
        if self.estimators.contains(&Family::BestSubset) {
            if self.k > self.n {
                return bad(format!("best subset needs k <= n (k = {}, n = {})", self.k, self.n));
            }
            let count = binomial(self.p, self.k);
            if self.solver.bss_mode == BssMode::Exhaustive && count > self.solver.bss_budget as u128 {
                return bad(format!(
                    "exhaustive best subset needs {count} fits, budget is {}",
                    self.solver.bss_budget
                ));
            }
        }
        Ok(())
    }

    /// User grid for `family`, if one was given.
    pub fn user_grid(&self, family: Family) -> Option<Vec<Tuning>> {
        let g = &self.grids;
        match family {
            Family::Ridge => g.ridge.as_ref().map(|v| v.iter().map(|&l| Tuning::ridge(l)).collect()),
            Family::Lasso => g.lasso.as_ref().map(|v| v.iter().map(|&l| Tuning::lasso(l)).collect()),
            Family::ElasticNet => match (&g.enet_lambda, &g.enet_gamma) {
                (Some(ls), Some(gs)) => Some(
                    ls.iter()
                        .flat_map(|&l| gs.iter().map(move |&gm| Tuning::enet(l, gm)))
                        .collect(),
                ),
                _ => None,
            },
            Family::BestSubset | Family::Zero => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SweepConfig {
        SweepConfig::new(50, 100, 5, 1.0, vec![0.5, 1.0], 10, vec![Family::Ridge, Family::Zero], 7)
    }

    #[test]
    fn parses_minimal_text() {
        let text = r#"
            n = 50
            p = 100
            k = 5
            tau = 1.0
            inv_snr_grid = [0.5, 1.0]
            trials = 10
            estimators = ["ridge", "zero"]
            master_seed = 7
        "#;
        assert_eq!(SweepConfig::from_toml_str(text).unwrap(), base());
    }

    #[test]
    fn round_trip() {
        let mut c = base();
        c.tuning_mode = TuningMode::Paper;
        c.signs = SignPattern::Symmetric;
        c.grids.enet_lambda = Some(vec![0.0, 0.1, 1.0 / 3.0]);
        c.grids.enet_gamma = Some(vec![-0.5, 2.0]);
        c.solver.bss_budget = 123;
        c.estimators.push(Family::ElasticNet);
        let text = c.to_toml_string().unwrap();
        assert_eq!(SweepConfig::from_toml_str(&text).unwrap(), c);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = base();
        c.inv_snr_grid = vec![1.0, 0.5];
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = base();
        c.estimators.clear();
        assert!(c.validate().is_err());
        let mut c = base();
        c.estimators = vec![Family::BestSubset];
        c.solver.bss_mode = BssMode::Exhaustive;
        assert!(c.validate().is_err());
        c.solver.bss_mode = BssMode::BranchAndBound;
        assert!(c.validate().is_ok());
        assert!(SweepConfig::from_toml_str("n = 1\nbogus = 2").is_err());
        let mut c = base();
        c.grids.enet_lambda = Some(vec![1.0]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn pilot_size() {
        let mut c = base();
        c.trials = 100;
        assert_eq!(c.pilot_trials(), 25);
        c.trials = 1;
        assert_eq!(c.pilot_trials(), 1);
    }
}
