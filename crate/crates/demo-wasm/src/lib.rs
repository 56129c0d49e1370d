//! Browser bindings for the static demo page in `www/`.
//!
//! Every function returns plain numbers or a JSON string so the page needs
//! no generated TypeScript types. Failures come back as `{"error": "..."}`.

use serde_json::{json, Value};
use snrlab_core::estimators::Family;
use snrlab_core::harness::{run_sweep, SweepConfig, TuningMode};
use snrlab_core::theory::{risk_curve, soft_risk, FormulaId, SoftRiskParams};
use wasm_bindgen::prelude::*;

fn error_json(e: impl std::fmt::Display) -> String {
    json!({ "error": e.to_string() }).to_string()
}

/// `r(u)` of the shrunk soft-threshold rule at `points` values of `u` in `[0, u_max]`.
#[wasm_bindgen]
pub fn soft_risk_curve(chi1: f64, chi2: f64, noise_sd: f64, u_max: f64, points: usize) -> Vec<f64> {
    let Ok(params) = SoftRiskParams::new(chi1, chi2, noise_sd) else {
        return Vec::new();
    };
    let points = points.clamp(2, 2000);
    (0..points)
        .map(|i| soft_risk(u_max * i as f64 / (points - 1) as f64, &params))
        .collect()
}

/// Theory curves normalized by `k tau^2` over a log-spaced `1/SNR` grid.
///
/// Returns `{"inv_snr": [...], "curves": {"<formula>": [...]}}`.
#[wasm_bindgen]
pub fn theory_curves(p: usize, k: usize, tau: f64, inv_min: f64, inv_max: f64, points: usize) -> String {
    if !(inv_min > 0.0 && inv_max > inv_min) {
        return error_json("need 0 < inv_min < inv_max");
    }
    let points = points.clamp(2, 500);
    let grid: Vec<f64> = (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            (inv_min.ln() + t * (inv_max.ln() - inv_min.ln())).exp()
        })
        .collect();
    let mut curves = serde_json::Map::new();
    for f in [
        FormulaId::FirstOrderI,
        FormulaId::FirstOrderIII,
        FormulaId::RidgeSecondOrder,
        FormulaId::EnetLower,
        FormulaId::EnetUpper,
    ] {
        match risk_curve(f, p, k, tau, &grid) {
            Ok(c) => {
                let ys: Vec<f64> = c.points.iter().map(|pt| pt.1).collect();
                curves.insert(f.name().to_string(), json!(ys));
            }
            Err(e) => return error_json(e),
        }
    }
    json!({ "inv_snr": grid, "curves": Value::Object(curves) }).to_string()
}

/// Small Monte Carlo run with the closed-form tunings at one noise level.
///
/// Returns `{"<estimator>": {"mean": .., "se": .., "trials": ..}}`; an
/// estimator whose tuning does not exist at this SNR reports `"trials": 0`.
#[wasm_bindgen]
pub fn simulate_mse(n: usize, p: usize, k: usize, tau: f64, inv_snr: f64, trials: usize, seed: u32) -> String {
    if n * p > 200_000 || trials > 200 {
        return error_json("demo limits: n * p <= 200000 and trials <= 200");
    }
    let mut cfg = SweepConfig::new(
        n,
        p,
        k,
        tau,
        vec![inv_snr],
        trials,
        vec![Family::Ridge, Family::Lasso, Family::ElasticNet, Family::Zero],
        seed as u64,
    );
    cfg.tuning_mode = TuningMode::Paper;
    match run_sweep(&cfg) {
        Ok(r) => {
            let mut out = serde_json::Map::new();
            for c in &r.cells {
                let mean = if c.mean_scaled_mse.is_finite() { json!(c.mean_scaled_mse) } else { Value::Null };
                out.insert(
                    c.estimator.name().to_string(),
                    json!({ "mean": mean, "se": c.se_scaled_mse, "trials": c.trials }),
                );
            }
            Value::Object(out).to_string()
        }
        Err(e) => error_json(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soft_risk_curve_starts_at_origin_risk() {
        let v = soft_risk_curve(1.0, 0.0, 1.0, 4.0, 9);
        assert_eq!(v.len(), 9);
        assert!(v.windows(2).all(|w| w[1] >= w[0]));
        assert!(soft_risk_curve(-1.0, 0.0, 1.0, 4.0, 9).is_empty());
    }

    #[test]
    fn theory_curves_json() {
        let v: Value = serde_json::from_str(&theory_curves(1000, 10, 1.0, 0.1, 10.0, 20)).unwrap();
        assert_eq!(v["inv_snr"].as_array().unwrap().len(), 20);
        assert_eq!(v["curves"]["first-order-low"][0], json!(1.0));
        let e: Value = serde_json::from_str(&theory_curves(1000, 10, 1.0, 1.0, 0.5, 20)).unwrap();
        assert!(e["error"].is_string());
    }

    #[test]
    fn simulate_mse_json() {
        let v: Value = serde_json::from_str(&simulate_mse(40, 60, 3, 1.0, 2.0, 5, 1)).unwrap();
        assert_eq!(v["zero"]["mean"], json!(1.0));
        assert_eq!(v["ridge"]["trials"], json!(5));
        // deterministic in the seed
        assert_eq!(simulate_mse(40, 60, 3, 1.0, 2.0, 5, 1), simulate_mse(40, 60, 3, 1.0, 2.0, 5, 1));
        assert!(serde_json::from_str::<Value>(&simulate_mse(1000, 1000, 3, 1.0, 2.0, 5, 1)).unwrap()["error"].is_string());
    }
}
