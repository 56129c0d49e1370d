use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::run::SweepResult;
use crate::error::{Error, Result};
use crate::estimators::Family;
use crate::model::RegimeLabel;

pub const CSV_HEADER: &str = "estimator,inv_snr,mean_scaled_mse,se_scaled_mse,trials,master_seed";

/// Positional decimal with 17 significant digits; exact zero prints as `0`.
pub fn format_sig17(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let mut out = String::new();
    if x < 0.0 {
        out.push('-');
    }
    if exp >= 16 {
        out.push_str(&digits);
        out.push_str(&"0".repeat((exp - 16) as usize));
    } else if exp >= 0 {
        let split = exp as usize + 1;
        out.push_str(&digits[..split]);
        out.push('.');
        out.push_str(&digits[split..]);
    } else {
        out.push_str("0.");
        out.push_str(&"0".repeat((-exp - 1) as usize));
        out.push_str(&digits);
    }
    out
}

/// The CSV document for `result`: header plus one row per cell.
pub fn csv_string(result: &SweepResult) -> String {
    let mut cells: Vec<_> = result.cells.iter().collect();
    cells.sort_by(|a, b| a.estimator.name().cmp(b.estimator.name()).then(a.inv_snr.total_cmp(&b.inv_snr)));
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for c in cells {
        let _ = writeln!(
            out,
            "{},{:?},{},{},{},{}",
            c.estimator.name(),
            c.inv_snr,
            format_sig17(c.mean_scaled_mse),
            format_sig17(c.se_scaled_mse),
            c.trials,
            result.config.master_seed
        );
    }
    out
}

pub fn write_csv(result: &SweepResult, path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(result)).map_err(|e| Error::io(path, e))
}

/// Empirical scaled risk next to the theory values at the same grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub estimator: Family,
    pub inv_snr: f64,
    pub regime: Option<RegimeLabel>,
    pub empirical: f64,
    pub se: f64,
    pub first_order: Option<f64>,
    pub ridge_second_order: Option<f64>,
    pub enet_lower: Option<f64>,
    pub enet_upper: Option<f64>,
    /// The formula this estimator is compared to: the zero-estimator risk for
    /// `zero`, the second-order value for ridge outside the high-SNR regime,
    /// and the first-order minimax risk otherwise.
    pub reference: Option<f64>,
    /// `empirical / reference`.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub rows: Vec<ComparisonRow>,
}

/// Theory-versus-simulation table. All risks are divided by `k tau^2`.
pub fn compare_theory(result: &SweepResult) -> TheoryReport {
    let rows = result
        .cells
        .iter()
        .map(|c| {
            let t = result.theory.iter().find(|t| t.inv_snr == c.inv_snr);
            let regime = t.and_then(|t| t.regime).map(|r| r.label);
            let reference = t.and_then(|t| match c.estimator {
                Family::Zero => t.zero,
                Family::Ridge if regime != Some(RegimeLabel::High) => t.ridge_second_order.or(t.first_order),
                _ => t.first_order,
            });
            ComparisonRow {
                estimator: c.estimator,
                inv_snr: c.inv_snr,
                regime,
                empirical: c.mean_scaled_mse,
                se: c.se_scaled_mse,
                first_order: t.and_then(|t| t.first_order),
                ridge_second_order: t.and_then(|t| t.ridge_second_order),
                enet_lower: t.and_then(|t| t.enet_lower),
                enet_upper: t.and_then(|t| t.enet_upper),
                reference,
                ratio: reference.filter(|r| *r > 0.0).map(|r| c.mean_scaled_mse / r),
            }
        })
        .collect();
    TheoryReport { rows }
}

impl TheoryReport {
    /// Fixed-width text table.
    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        let mut out = format!(
            "{:<12} {:>8} {:>7} {:>9} {:>8} {:>9} {:>9} {:>9} {:>9} {:>7}\n",
            "estimator", "inv_snr", "regime", "empirical", "se", "first", "ridge2", "enet_lo", "enet_hi", "ratio"
        );
        for r in &self.rows {
            let regime = match r.regime {
                Some(RegimeLabel::Low) => "low",
                Some(RegimeLabel::Medium) => "medium",
                Some(RegimeLabel::High) => "high",
                None => "-",
            };
            let _ = writeln!(
                out,
                "{:<12} {:>8} {:>7} {:>9.4} {:>8.4} {:>9} {:>9} {:>9} {:>9} {:>7}",
                r.estimator.name(),
                format!("{:?}", r.inv_snr),
                regime,
                r.empirical,
                r.se,
                opt(r.first_order),
                opt(r.ridge_second_order),
                opt(r.enet_lower),
                opt(r.enet_upper),
                opt(r.ratio),
            );
        }
        out
    }
}
