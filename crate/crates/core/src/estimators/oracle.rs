//! Oracle tuning: pick the grid point with the smallest average scaled error
//! against the true signal.

use rayon::prelude::*;

use super::enet::enet_from_correlations;
use super::lasso::{lasso_path, LassoOptions};
use super::ridge::{ridge_fit, RidgePath};
use super::{fit, Family, FitOptions, Provenance, Tuning};
use crate::error::{Error, Result};
use crate::model::{Dataset, ParamSpace};
use crate::stats::pairwise_sum;

pub const DEFAULT_GRID_POINTS: usize = 40;

/// `points` log-spaced values from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Default search grid around the SNR-aware formula for `family`.
///
/// * ridge: 40 values over `lambda_0 * [1e-3, 1e3]`, `lambda_0 = p sigma^2 / (k tau^2)`;
/// * lasso: 40 values over `lambda_0 * [0.1, 10]`, `lambda_0 = sigma sqrt(2 log(p/k))`
///   (smaller values approach interpolation, cost thousands of sweeps and never win);
/// * elastic net: a 40 x 40 product of thresholds `lambda/2` in `sigma * [0, 4]`
///   and shrink factors `1/(1 + gamma)` log-spaced in `[1e-3, 1]`;
/// * best subset: the true `k`; zero: the single trivial point.
pub fn default_grid(family: Family, p: usize, space: &ParamSpace) -> Result<Vec<Tuning>> {
    let pts = DEFAULT_GRID_POINTS;
    let sigma = space.sigma;
    Ok(match family {
        Family::Ridge => {
            let l0 = p as f64 * sigma * sigma / space.energy();
            log_space(l0 * 1e-3, l0 * 1e3, pts).into_iter().map(Tuning::ridge).collect()
        }
        Family::Lasso => {
            if p <= space.k {
                return Err(Error::InvalidArgument("lasso grid needs p > k".into()));
            }
            let l0 = sigma * (2.0 * (p as f64 / space.k as f64).ln()).sqrt();
            log_space(l0 * 0.1, l0 * 10.0, pts).into_iter().map(Tuning::lasso).collect()
        }
        Family::ElasticNet => {
            let shrinks = log_space(1e-3, 1.0, pts);
            let mut grid = Vec::with_capacity(pts * pts);
            for i in 0..pts {
                let threshold = 4.0 * sigma * i as f64 / (pts - 1) as f64;
                for &c in &shrinks {
                    grid.push(Tuning::enet(2.0 * threshold, 1.0 / c - 1.0));
                }
            }
            grid
        }
        Family::BestSubset => vec![Tuning::best_subset(space.k.min(p))],
        Family::Zero => vec![Tuning::zero()],
    })
}

/// Squared error scaled by `||beta||^2`, or unscaled when `beta = 0`.
pub fn scaled_loss(data: &Dataset, coefficients: &[f64]) -> f64 {
    let err = data.beta.sq_error(coefficients);
    let norm = data.beta.sq_norm();
    if norm > 0.0 {
        err / norm
    } else {
        err
    }
}

/// Grid point minimising the mean scaled error over `datasets`.
///
/// A grid point that fails on any dataset is dropped. Exact ties go to the
/// smaller `lambda`, then the smaller `gamma`. The returned tuning is marked
/// [`Provenance::OracleGrid`].
pub fn oracle_tune(
    family: Family,
    datasets: &[Dataset],
    grid: &[Tuning],
    opts: &FitOptions,
) -> Result<Tuning> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("oracle tuning needs a nonempty grid".into()));
    }
    if datasets.is_empty() {
        return Err(Error::InvalidArgument("oracle tuning needs at least one dataset".into()));
    }
    if let Some(t) = grid.iter().find(|t| t.family != family) {
        return Err(Error::InvalidArgument(format!(
            "grid point of family {} in a {} grid",
            t.family, family
        )));
    }
    let (n, p) = (datasets[0].n(), datasets[0].p());
    if datasets.iter().any(|d| d.n() != n || d.p() != p) {
        return Err(Error::InvalidArgument("oracle datasets must share (n, p)".into()));
    }

    let table: Vec<Vec<Option<f64>>> = datasets
        .par_iter()
        .map(|d| grid_losses(family, d, grid, opts))
        .collect();
    let scores = mean_scores(&table, grid.len());
    pick(grid, &scores)
        .map(|t| t.provenance(Provenance::OracleGrid))
        .ok_or_else(|| Error::InvalidArgument("every grid point failed on some dataset".into()))
}

/// Mean over datasets per grid point; `None` when any dataset failed.
pub fn mean_scores(table: &[Vec<Option<f64>>], points: usize) -> Vec<Option<f64>> {
    (0..points)
        .map(|g| {
            let col: Option<Vec<f64>> = table.iter().map(|row| row[g]).collect();
            col.map(|v| pairwise_sum(&v) / v.len() as f64)
        })
        .collect()
}

fn pick(grid: &[Tuning], scores: &[Option<f64>]) -> Option<Tuning> {
    let mut best: Option<(f64, Tuning)> = None;
    for (t, s) in grid.iter().zip(scores) {
        let Some(s) = *s else { continue };
        if !s.is_finite() {
            continue;
        }
        let better = match &best {
            None => true,
            Some((bs, bt)) => {
                s < *bs
                    || (s == *bs
                        && (t.lambda, t.gamma, t.k) < (bt.lambda, bt.gamma, bt.k))
            }
        };
        if better {
            best = Some((s, *t));
        }
    }
    best.map(|(_, t)| t)
}

/// Scaled loss of every grid point on one dataset.
pub fn grid_losses(
    family: Family,
    data: &Dataset,
    grid: &[Tuning],
    opts: &FitOptions,
) -> Vec<Option<f64>> {
    let x = &data.x;
    let y = &data.y;
    match family {
        Family::Ridge => {
            let path = RidgePath::new(x, y).ok();
            let beta = data.beta.to_dense();
            let proj = path.as_ref().map(|pa| pa.project(&beta));
            let norm = data.beta.sq_norm();
            grid.iter()
                .map(|t| {
                    if t.lambda > 0.0 {
                        let (pa, pr) = (path.as_ref()?, proj.as_ref()?);
                        let err = pa.sq_error(t.lambda, pr, norm);
                        Some(if norm > 0.0 { err / norm } else { err })
                    } else {
                        let est = ridge_fit(x, y, t.lambda).ok()?;
                        Some(scaled_loss(data, &est.coefficients))
                    }
                })
                .collect()
        }
        Family::Lasso => {
            let mut idx: Vec<usize> = (0..grid.len()).collect();
            idx.sort_by(|&a, &b| grid[b].lambda.total_cmp(&grid[a].lambda));
            let lambdas: Vec<f64> = idx.iter().map(|&i| grid[i].lambda).collect();
            let lopts = LassoOptions {
                tol: opts.lasso_tol,
                max_iter: opts.lasso_max_iter,
                ..LassoOptions::default()
            };
            let mut out = vec![None; grid.len()];
            if let Ok(path) = lasso_path(x, y, &lambdas, &lopts) {
                for (i, est) in idx.into_iter().zip(path) {
                    out[i] = Some(scaled_loss(data, &est.coefficients));
                }
            }
            out
        }
        Family::ElasticNet => {
            let xty = x.tr_mul_vec(y);
            grid.iter()
                .map(|t| {
                    let est = enet_from_correlations(&xty, t.lambda, t.gamma).ok()?;
                    Some(scaled_loss(data, &est.coefficients))
                })
                .collect()
        }
        Family::BestSubset | Family::Zero => grid
            .iter()
            .map(|t| {
                let est = fit(x, y, t, opts).ok()?;
                Some(scaled_loss(data, &est.coefficients))
            })
            .collect(),
    }
}
