use std::collections::HashSet;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{SweepConfig, TuningMode};
use crate::error::{Error, Result};
use crate::estimators::oracle::scaled_loss;
use crate::estimators::{
    default_grid, enet_default_tuning, fit, lasso_default_lambda, oracle_tune, ridge_default_lambda,
    Certificate, Family, Tuning,
};
use crate::model::{combine_ids, Dataset, DatasetShape, ParamSpace};
use crate::stats::{mean_se, MeanSe};

/// Which batch a dataset belongs to. Pilot and evaluation streams never overlap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Evaluation = 0,
    Pilot = 1,
}

/// Stream identifier of `(inv_snr, trial, phase)`.
pub fn stream_id(inv_snr: f64, trial: u64, phase: Phase) -> u64 {
    combine_ids(combine_ids(inv_snr.to_bits(), trial), phase as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "status", content = "reason")]
pub enum RecordStatus {
    Ok,
    /// The estimator returned an error; the sweep continues.
    Failed(String),
    /// Deliberately not run, e.g. an uncertified best-subset search.
    Skipped(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub estimator: Family,
    pub inv_snr: f64,
    pub trial_id: u64,
    /// `||b - beta||^2 / ||beta||^2`; NaN unless the status is `Ok`.
    pub scaled_mse: f64,
    /// `||b - beta||^2`; NaN unless the status is `Ok`.
    pub unscaled_mse: f64,
    pub tuning: Option<Tuning>,
    /// Seconds spent fitting.
    pub wall_time: f64,
    pub status: RecordStatus,
}

impl TrialRecord {
    pub fn is_ok(&self) -> bool {
        self.status == RecordStatus::Ok
    }

    /// Equality ignoring `wall_time`.
    pub fn same_outcome(&self, other: &TrialRecord) -> bool {
        let (a, b) = (self, other);
        a.estimator == b.estimator
            && a.inv_snr.to_bits() == b.inv_snr.to_bits()
            && a.trial_id == b.trial_id
            && a.scaled_mse.to_bits() == b.scaled_mse.to_bits()
            && a.unscaled_mse.to_bits() == b.unscaled_mse.to_bits()
            && a.tuning == b.tuning
            && a.status == b.status
    }
}

/// Tuning chosen for one estimator at one grid point, or why none could be.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuningChoice {
    pub estimator: Family,
    pub inv_snr: f64,
    pub tuning: std::result::Result<Tuning, String>,
}

/// Mean and standard error of one `(estimator, inv_snr)` cell over successful trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub estimator: Family,
    pub inv_snr: f64,
    pub mean_scaled_mse: f64,
    pub se_scaled_mse: f64,
    pub mean_unscaled_mse: f64,
    pub se_unscaled_mse: f64,
    /// Successful trials.
    pub trials: usize,
    /// Failed or skipped trials.
    pub excluded: usize,
    /// Set when fewer than two trials succeeded, so the reported SE of 0 is a placeholder.
    pub se_undefined: bool,
}

/// Theory values at one grid point, each normalized by `k tau^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryPoint {
    pub inv_snr: f64,
    pub regime: Option<crate::model::SnrRegime>,
    pub first_order: Option<f64>,
    pub ridge_second_order: Option<f64>,
    pub enet_lower: Option<f64>,
    pub enet_upper: Option<f64>,
    pub zero: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub tunings: Vec<TuningChoice>,
    /// Ordered by grid point, then trial, then the configured estimator order.
    pub records: Vec<TrialRecord>,
    /// Sorted by estimator name, then `inv_snr`.
    pub cells: Vec<CellSummary>,
    pub theory: Vec<TheoryPoint>,
}

impl SweepResult {
    pub fn cell(&self, estimator: Family, inv_snr: f64) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.estimator == estimator && c.inv_snr == inv_snr)
    }

    /// Mean and SE of the per-trial difference `scaled(a) - scaled(b)` over
    /// trials where both succeeded. The two estimators share each dataset,
    /// so this SE is the right yardstick for "a beats b by m SEs".
    pub fn paired_difference(&self, a: Family, b: Family, inv_snr: f64) -> Option<MeanSe> {
        let pick = |f: Family| -> Vec<(u64, f64)> {
            self.records
                .iter()
                .filter(|r| r.estimator == f && r.inv_snr == inv_snr && r.is_ok())
                .map(|r| (r.trial_id, r.scaled_mse))
                .collect()
        };
        let (ra, rb) = (pick(a), pick(b));
        let diffs: Vec<f64> = ra
            .iter()
            .filter_map(|(t, va)| rb.iter().find(|(u, _)| u == t).map(|(_, vb)| va - vb))
            .collect();
        if diffs.is_empty() {
            None
        } else {
            Some(mean_se(&diffs))
        }
    }
}

fn shape(config: &SweepConfig) -> DatasetShape {
    DatasetShape { n: config.n, p: config.p, k: config.k, tau: config.tau, signs: config.signs }
}

fn space_at(config: &SweepConfig, inv_snr: f64) -> Result<ParamSpace> {
    ParamSpace::new(config.k, config.tau, config.tau * inv_snr)
}

/// Closed-form tuning for `family` at `inv_snr`.
pub fn paper_tuning(config: &SweepConfig, family: Family, inv_snr: f64) -> Result<Tuning> {
    match family {
        Family::BestSubset => return Ok(Tuning::best_subset(config.k)),
        Family::Zero => return Ok(Tuning::zero()),
        _ => {}
    }
    let space = space_at(config, inv_snr)?;
    match family {
        Family::Ridge => Ok(ridge_default_lambda(config.p, &space)),
        Family::Lasso => lasso_default_lambda(config.p, config.k, space.sigma, config.lasso_eps),
        Family::ElasticNet => enet_default_tuning(config.p, &space),
        Family::BestSubset | Family::Zero => unreachable!(),
    }
}

fn grid_for(config: &SweepConfig, family: Family, inv_snr: f64) -> Result<Vec<Tuning>> {
    if let Some(g) = config.user_grid(family) {
        return Ok(g);
    }
    match family {
        Family::BestSubset => Ok(vec![Tuning::best_subset(config.k)]),
        Family::Zero => Ok(vec![Tuning::zero()]),
        _ => {
            if inv_snr == 0.0 {
                return Err(Error::InvalidArgument(
                    "default grids scale with sigma; give an explicit grid for sigma = 0".into(),
                ));
            }
            default_grid(family, config.p, &space_at(config, inv_snr)?)
        }
    }
}

/// Pilot datasets for one grid point.
pub fn pilot_datasets(config: &SweepConfig, inv_snr: f64) -> Result<Vec<Dataset>> {
    let sigma = config.tau * inv_snr;
    (0..config.pilot_trials() as u64)
        .into_par_iter()
        .map(|t| {
            Dataset::generate(&shape(config), sigma, config.master_seed, stream_id(inv_snr, t, Phase::Pilot))
        })
        .collect()
}

/// Tuning for every configured estimator at one grid point.
pub fn plan_tunings(config: &SweepConfig, inv_snr: f64) -> Result<Vec<TuningChoice>> {
    let pilots = match config.tuning_mode {
        TuningMode::Oracle => pilot_datasets(config, inv_snr)?,
        TuningMode::Paper => Vec::new(),
    };
    Ok(config
        .estimators
        .iter()
        .map(|&family| {
            let tuning = match config.tuning_mode {
                TuningMode::Paper => paper_tuning(config, family, inv_snr),
                TuningMode::Oracle => grid_for(config, family, inv_snr)
                    .and_then(|grid| oracle_tune(family, &pilots, &grid, &config.solver)),
            };
            TuningChoice { estimator: family, inv_snr, tuning: tuning.map_err(|e| e.to_string()) }
        })
        .collect())
}

/// One evaluation dataset, fitted by every estimator in `plan`.
pub fn run_trial(
    config: &SweepConfig,
    inv_snr: f64,
    trial_id: u64,
    plan: &[TuningChoice],
) -> Result<Vec<TrialRecord>> {
    let data = Dataset::generate(
        &shape(config),
        config.tau * inv_snr,
        config.master_seed,
        stream_id(inv_snr, trial_id, Phase::Evaluation),
    )?;
    let norm = data.beta.sq_norm();
    Ok(plan
        .iter()
        .map(|choice| {
            let mut rec = TrialRecord {
                estimator: choice.estimator,
                inv_snr,
                trial_id,
                scaled_mse: f64::NAN,
                unscaled_mse: f64::NAN,
                tuning: choice.tuning.as_ref().ok().copied(),
                wall_time: 0.0,
                status: RecordStatus::Ok,
            };
            let tuning = match &choice.tuning {
                Ok(t) => t,
                Err(msg) => {
                    rec.status = RecordStatus::Failed(format!("no tuning: {msg}"));
                    return rec;
                }
            };
            let start = Instant::now();
            let outcome = fit(&data.x, &data.y, tuning, &config.solver);
            rec.wall_time = start.elapsed().as_secs_f64();
            match outcome {
                Ok(est) if est.certificate == Some(Certificate::HeuristicOnly) => {
                    rec.status = RecordStatus::Skipped("best subset search exceeded its node budget".into());
                }
                Ok(est) => {
                    rec.unscaled_mse = data.beta.sq_error(&est.coefficients);
                    rec.scaled_mse = if norm > 0.0 {
                        scaled_loss(&data, &est.coefficients)
                    } else {
                        rec.unscaled_mse
                    };
                }
                Err(e) => rec.status = RecordStatus::Failed(e.to_string()),
            }
            rec
        })
        .collect())
}

/// Theory overlays at one grid point; `None` where a formula does not apply.
pub fn theory_point(config: &SweepConfig, inv_snr: f64) -> TheoryPoint {
    use crate::theory::{enet_second_order_bounds, minimax_first_order_auto, ridge_second_order_risk};
    let mut pt = TheoryPoint {
        inv_snr,
        regime: None,
        first_order: None,
        ridge_second_order: None,
        enet_lower: None,
        enet_upper: None,
        zero: None,
    };
    let Ok(space) = space_at(config, inv_snr) else { return pt };
    let e = space.energy();
    pt.zero = Some(1.0);
    if let Ok((regime, v)) = minimax_first_order_auto(config.p, &space) {
        pt.regime = Some(regime);
        pt.first_order = Some(v / e);
    }
    if let Ok(v) = ridge_second_order_risk(config.p, &space) {
        pt.ridge_second_order = Some(v.value / e);
    }
    if let Ok(b) = enet_second_order_bounds(config.p, &space) {
        pt.enet_lower = Some(b.lower.value / e);
        pt.enet_upper = Some(b.upper.value / e);
    }
    pt
}

/// Summaries over the records of one cell, in record order.
pub fn summarize(estimator: Family, inv_snr: f64, records: &[&TrialRecord]) -> CellSummary {
    let ok: Vec<&&TrialRecord> = records.iter().filter(|r| r.is_ok()).collect();
    let scaled: Vec<f64> = ok.iter().map(|r| r.scaled_mse).collect();
    let unscaled: Vec<f64> = ok.iter().map(|r| r.unscaled_mse).collect();
    let s = mean_se(&scaled);
    let u = mean_se(&unscaled);
    CellSummary {
        estimator,
        inv_snr,
        mean_scaled_mse: s.mean,
        se_scaled_mse: s.se,
        mean_unscaled_mse: u.mean,
        se_unscaled_mse: u.se,
        trials: s.count,
        excluded: records.len() - s.count,
        se_undefined: s.se_undefined(),
    }
}

/// Full sweep. Deterministic given the config, whatever the size of the
/// rayon pool it runs in.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    check_stream_ids(config)?;
    let mut tunings = Vec::new();
    let mut records = Vec::new();
    let mut theory = Vec::new();
    for &inv in &config.inv_snr_grid {
        let plan = plan_tunings(config, inv)?;
        let batch: Vec<Vec<TrialRecord>> = (0..config.trials as u64)
            .into_par_iter()
            .map(|t| run_trial(config, inv, t, &plan))
            .collect::<Result<_>>()?;
        records.extend(batch.into_iter().flatten());
        tunings.extend(plan);
        theory.push(theory_point(config, inv));
    }
    let mut cells = Vec::new();
    for &family in &config.estimators {
        for &inv in &config.inv_snr_grid {
            let cell: Vec<&TrialRecord> =
                records.iter().filter(|r| r.estimator == family && r.inv_snr == inv).collect();
            cells.push(summarize(family, inv, &cell));
        }
    }
    cells.sort_by(|a, b| {
        a.estimator.name().cmp(b.estimator.name()).then(a.inv_snr.total_cmp(&b.inv_snr))
    });
    Ok(SweepResult { config: config.clone(), tunings, records, cells, theory })
}

/// Every dataset of the sweep must come from its own stream.
fn check_stream_ids(config: &SweepConfig) -> Result<()> {
    let mut seen = HashSet::new();
    let pilots = match config.tuning_mode {
        TuningMode::Oracle => config.pilot_trials() as u64,
        TuningMode::Paper => 0,
    };
    for &inv in &config.inv_snr_grid {
        let ids = (0..config.trials as u64)
            .map(|t| stream_id(inv, t, Phase::Evaluation))
            .chain((0..pilots).map(|t| stream_id(inv, t, Phase::Pilot)));
        for id in ids {
            if !seen.insert(id) {
                return Err(Error::InvalidArgument(format!("stream id collision at inv_snr = {inv}")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(estimators: Vec<Family>, trials: usize) -> SweepConfig {
        SweepConfig::new(30, 20, 3, 1.0, vec![0.5, 2.0], trials, estimators, 11)
    }

    #[test]
    fn zero_estimator_scaled_error_is_one() {
        let c = cfg(vec![Family::Zero], 3);
        let plan = plan_tunings(&c, 0.5).unwrap();
        let recs = run_trial(&c, 0.5, 0, &plan).unwrap();
        assert_eq!(recs[0].scaled_mse, 1.0);
    }

    #[test]
    fn noiseless_ridge_recovers() {
        let mut c = SweepConfig::new(40, 20, 3, 1.0, vec![0.0], 2, vec![Family::Ridge], 3);
        c.grids.ridge = Some(vec![1e-9]);
        let plan = plan_tunings(&c, 0.0).unwrap();
        let recs = run_trial(&c, 0.0, 0, &plan).unwrap();
        assert!(recs[0].scaled_mse <= 1e-6, "{:?}", recs[0]);
    }

    #[test]
    fn trial_is_deterministic() {
        let c = cfg(vec![Family::Ridge, Family::Lasso, Family::ElasticNet], 4);
        let plan = plan_tunings(&c, 2.0).unwrap();
        let a = run_trial(&c, 2.0, 1, &plan).unwrap();
        let b = run_trial(&c, 2.0, 1, &plan).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.same_outcome(y)));
    }

    #[test]
    fn single_trial_flags_se() {
        let c = SweepConfig::new(10, 8, 2, 1.0, vec![1.0], 1, vec![Family::Zero], 1);
        let r = run_sweep(&c).unwrap();
        assert_eq!(r.cells.len(), 1);
        assert_eq!(r.cells[0].mean_scaled_mse, 1.0);
        assert_eq!(r.cells[0].se_scaled_mse, 0.0);
        assert!(r.cells[0].se_undefined);
    }

    #[test]
    fn failures_are_recorded_not_fatal() {
        // the closed-form elastic net tuning has gamma < 0 at high SNR
        let mut c = SweepConfig::new(30, 40, 4, 3.0, vec![0.2], 3, vec![Family::ElasticNet, Family::Zero], 2);
        c.tuning_mode = TuningMode::Paper;
        let r = run_sweep(&c).unwrap();
        let enet = r.cell(Family::ElasticNet, 0.2).unwrap();
        assert_eq!((enet.trials, enet.excluded), (0, 3));
        assert!(r.records.iter().any(|x| matches!(x.status, RecordStatus::Failed(_))));
        assert_eq!(r.cell(Family::Zero, 0.2).unwrap().trials, 3);
    }

    #[test]
    fn uncertified_best_subset_is_skipped() {
        let mut c = SweepConfig::new(30, 60, 6, 1.0, vec![3.0], 2, vec![Family::BestSubset], 4);
        c.solver.bss_budget = 5;
        let r = run_sweep(&c).unwrap();
        assert!(r.records.iter().all(|x| matches!(x.status, RecordStatus::Skipped(_))));
    }

    #[test]
    fn pilot_and_evaluation_streams_are_disjoint() {
        let c = cfg(vec![Family::Ridge], 50);
        let eval: HashSet<u64> = (0..50).map(|t| stream_id(0.5, t, Phase::Evaluation)).collect();
        assert!((0..c.pilot_trials() as u64).all(|t| !eval.contains(&stream_id(0.5, t, Phase::Pilot))));
        assert!(check_stream_ids(&c).is_ok());
    }

    #[test]
    fn aggregation_matches_naive_pass() {
        let c = cfg(vec![Family::Ridge, Family::Zero], 12);
        let r = run_sweep(&c).unwrap();
        for cell in &r.cells {
            let v: Vec<f64> = r
                .records
                .iter()
                .filter(|x| x.estimator == cell.estimator && x.inv_snr == cell.inv_snr)
                .map(|x| x.scaled_mse)
                .collect();
            let m = v.iter().sum::<f64>() / v.len() as f64;
            let sd = (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt();
            assert!((cell.mean_scaled_mse - m).abs() <= 1e-12 * m.abs());
            assert!((cell.se_scaled_mse - sd / (v.len() as f64).sqrt()).abs() <= 1e-12 * sd);
        }
    }

    #[test]
    fn sweep_invariant_to_thread_count() {
        let c = cfg(vec![Family::Ridge, Family::Lasso, Family::ElasticNet], 6);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_sweep(&c).unwrap())
        };
        let (a, b) = (run(1), run(3));
        assert_eq!(a.cells, b.cells);
        assert_eq!(a.tunings, b.tunings);
        assert!(a.records.iter().zip(&b.records).all(|(x, y)| x.same_outcome(y)));
    }

    #[test]
    fn paired_difference_of_identical_is_zero() {
        let c = cfg(vec![Family::Zero, Family::Ridge], 5);
        let r = run_sweep(&c).unwrap();
        let d = r.paired_difference(Family::Zero, Family::Zero, 0.5).unwrap();
        assert_eq!((d.mean, d.se, d.count), (0.0, 0.0, 5));
    }
}
