use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::report::CSV_HEADER;
use crate::error::{Error, Result};
use crate::estimators::Family;
use crate::theory::{risk_curve, FormulaId};

/// One parsed data row of a sweep CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub estimator: Family,
    pub inv_snr: f64,
    pub mean_scaled_mse: f64,
    pub se_scaled_mse: f64,
    pub trials: usize,
    pub master_seed: u64,
}

/// Dimensions needed to draw the theory overlays.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OverlaySpec {
    pub p: usize,
    pub k: usize,
    pub tau: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotOptions {
    pub y_max: f64,
    pub width: u32,
    pub height: u32,
    pub title: Option<String>,
    pub theory: Option<OverlaySpec>,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self { y_max: 1.0, width: 640, height: 420, title: None, theory: None }
    }
}

pub fn color(family: Family) -> &'static str {
    match family {
        Family::Ridge => "red",
        Family::Lasso => "blue",
        Family::ElasticNet => "green",
        Family::BestSubset => "purple",
        Family::Zero => "gray",
    }
}

/// Parse a sweep CSV. `path` is only used in error messages.
pub fn parse_csv(text: &str, path: &Path) -> Result<Vec<CsvRow>> {
    let err = |line: usize, message: String| Error::Schema { path: path.to_path_buf(), line, message };
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        Some(h) => return Err(err(1, format!("expected header `{CSV_HEADER}`, found `{h}`"))),
        None => return Err(err(1, "empty file".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let no = i + 2;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(err(no, format!("expected 6 fields, found {}", f.len())));
        }
        let estimator =
            Family::from_name(f[0]).ok_or_else(|| err(no, format!("unknown estimator `{}`", f[0])))?;
        let num = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| err(no, format!("bad {what} `{s}`")))
        };
        rows.push(CsvRow {
            estimator,
            inv_snr: num(f[1], "inv_snr")?,
            mean_scaled_mse: num(f[2], "mean_scaled_mse")?,
            se_scaled_mse: num(f[3], "se_scaled_mse")?,
            trials: f[4].parse().map_err(|_| err(no, format!("bad trials `{}`", f[4])))?,
            master_seed: f[5].parse().map_err(|_| err(no, format!("bad master_seed `{}`", f[5])))?,
        });
    }
    Ok(rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, path)
}

const MARGIN_L: f64 = 60.0;
const MARGIN_R: f64 = 130.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 45.0;

struct Axes {
    x0: f64,
    x1: f64,
    log_x: bool,
    y_max: f64,
    w: f64,
    h: f64,
}

impl Axes {
    fn tx(&self, v: f64) -> f64 {
        let (a, b, v) = if self.log_x {
            (self.x0.log10(), self.x1.log10(), v.log10())
        } else {
            (self.x0, self.x1, v)
        };
        let frac = if b > a { (v - a) / (b - a) } else { 0.5 };
        MARGIN_L + frac * (self.w - MARGIN_L - MARGIN_R)
    }

    fn ty(&self, v: f64) -> f64 {
        let v = v.clamp(0.0, self.y_max);
        self.h - MARGIN_B - v / self.y_max * (self.h - MARGIN_T - MARGIN_B)
    }

    fn points(&self, pts: &[(f64, f64)]) -> String {
        pts.iter()
            .map(|(x, y)| format!("{:.2},{:.2}", self.tx(*x), self.ty(*y)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// SVG line chart of scaled MSE against `1/SNR`, one polyline per estimator.
///
/// The x axis is logarithmic when the grid spans at least a decade. Values
/// are clamped to `[0, y_max]`. Theory overlays are dashed.
pub fn render_svg(rows: &[CsvRow], opts: &PlotOptions) -> Result<String> {
    if !(opts.y_max > 0.0 && opts.y_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("y_max must be positive, got {}", opts.y_max)));
    }
    let mut series: BTreeMap<Family, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        series.entry(r.estimator).or_default().push((r.inv_snr, r.mean_scaled_mse));
    }
    for pts in series.values_mut() {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.inv_snr).collect();
    let (mut x0, mut x1) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if xs.is_empty() {
        (x0, x1) = (0.0, 1.0);
    }
    let log_x = x0 > 0.0 && x1 / x0 >= 10.0;
    let ax = Axes { x0, x1, log_x, y_max: opts.y_max, w: opts.width as f64, h: opts.height as f64 };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
        w = opts.width,
        h = opts.height
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if let Some(t) = &opts.title {
        let _ = writeln!(s, r#"<text x="{:.2}" y="18" text-anchor="middle">{}</text>"#, ax.w / 2.0, escape(t));
    }
    // frame and ticks
    let (left, right) = (MARGIN_L, ax.w - MARGIN_R);
    let (top, bottom) = (MARGIN_T, ax.h - MARGIN_B);
    let _ = writeln!(
        s,
        r#"<rect x="{left:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        right - left,
        bottom - top
    );
    for i in 0..=4 {
        let v = opts.y_max * i as f64 / 4.0;
        let y = ax.ty(v);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{left:.2}" y2="{y:.2}" stroke="black"/>"#, left - 4.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, left - 6.0, y + 4.0, tick_label(v));
    }
    let mut xticks: Vec<f64> = xs.clone();
    xticks.sort_by(f64::total_cmp);
    xticks.dedup();
    for v in xticks {
        let x = ax.tx(v);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, bottom + 4.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, bottom + 17.0, tick_label(v));
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">1/SNR</text>"#, (left + right) / 2.0, ax.h - 8.0);
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">MSE</text>"#,
        (top + bottom) / 2.0,
        (top + bottom) / 2.0
    );

    let mut legend: Vec<(String, &str, bool)> = Vec::new();
    if let (Some(spec), false) = (opts.theory, xs.is_empty()) {
        let grid = overlay_grid(x0, x1, log_x);
        for (formula, stroke) in [
            (FormulaId::FirstOrderI, "black"),
            (FormulaId::RidgeSecondOrder, "darkred"),
            (FormulaId::EnetUpper, "darkgreen"),
        ] {
            let pts = overlay_points(formula, spec, &grid)?;
            if pts.is_empty() {
                continue;
            }
            let _ = writeln!(
                s,
                r#"<polyline class="theory" points="{}" fill="none" stroke="{stroke}" stroke-width="1.5" stroke-dasharray="6 4"/>"#,
                ax.points(&pts)
            );
            let label = if formula == FormulaId::FirstOrderI { "first-order" } else { formula.name() };
            legend.push((label.to_string(), stroke, true));
        }
    }
    for (family, pts) in &series {
        let _ = writeln!(
            s,
            r#"<polyline class="data" points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            ax.points(pts),
            color(*family)
        );
        legend.push((family.name().to_string(), color(*family), false));
    }
    // data entries first, in the fixed family order
    legend.sort_by_key(|(_, _, dashed)| *dashed);
    for (i, (label, stroke, dashed)) in legend.iter().enumerate() {
        let y = top + 10.0 + 18.0 * i as f64;
        let x = right + 10.0;
        let dash = if *dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{stroke}" stroke-width="2"{dash}/>"#,
            x + 22.0
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x + 28.0, y + 4.0, escape(label));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn overlay_grid(x0: f64, x1: f64, log_x: bool) -> Vec<f64> {
    const N: usize = 64;
    (0..N)
        .map(|i| {
            let t = i as f64 / (N - 1) as f64;
            if log_x {
                (x0.ln() + t * (x1.ln() - x0.ln())).exp()
            } else {
                x0 + t * (x1 - x0)
            }
        })
        .filter(|v| *v > 0.0)
        .collect()
}

/// The first-order curve switches to the high-SNR value where the regime says so.
fn overlay_points(formula: FormulaId, spec: OverlaySpec, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    use crate::model::ParamSpace;
    use crate::theory::minimax_first_order_auto;
    if formula == FormulaId::FirstOrderI {
        return grid
            .iter()
            .map(|&inv| {
                let space = ParamSpace::new(spec.k, spec.tau, spec.tau * inv)?;
                let (_, v) = minimax_first_order_auto(spec.p, &space)?;
                Ok((inv, v / space.energy()))
            })
            .collect();
    }
    Ok(risk_curve(formula, spec.p, spec.k, spec.tau, grid)?.points)
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" { "0".into() } else { s.to_string() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Read `csv_path` and write the chart to `svg_path`.
pub fn emit_plot(csv_path: &Path, svg_path: &Path, opts: &PlotOptions) -> Result<()> {
    let rows = read_csv(csv_path)?;
    let svg = render_svg(&rows, opts)?;
    std::fs::write(svg_path, svg).map_err(|e| Error::io(svg_path, e))
}
