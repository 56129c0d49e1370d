use super::{check_response, Estimate, Provenance, Tuning};
use crate::error::{Error, Result};
use crate::model::design::dot;
use crate::model::DesignMatrix;
use crate::theory::soft_threshold;

#[derive(Clone, Debug, PartialEq)]
pub struct LassoOptions {
    /// Target for the stationarity residual.
    pub tol: f64,
    /// Cap on coordinate sweeps (full and active-set sweeps both count).
    pub max_iter: usize,
    pub warm_start: Option<Vec<f64>>,
    /// Record the objective after every sweep.
    pub trace: bool,
}

impl Default for LassoOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 10_000,
            warm_start: None,
            trace: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LassoFit {
    pub estimate: Estimate,
    /// Objective after each sweep, starting with the initial point.
    pub trace: Vec<f64>,
}

/// Convert a weight for `||y - X b||^2 + lambda ||b||_1` to this crate's
/// half-scaled convention.
pub fn from_unhalved(lambda: f64) -> f64 {
    lambda / 2.0
}

/// Cyclic coordinate descent on `1/2 ||y - X b||^2 + lambda ||b||_1`.
///
/// After each full sweep the solver iterates on the active set, then checks the
/// stationarity residual over all coordinates on a freshly computed residual.
/// Hitting `max_iter` returns the current iterate with `converged = false`.
pub fn lasso_fit(
    x: &DesignMatrix,
    y: &[f64],
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Estimate> {
    let opts = LassoOptions {
        tol,
        max_iter,
        ..LassoOptions::default()
    };
    Ok(lasso_fit_with(x, y, lambda, &opts)?.estimate)
}

pub fn lasso_fit_with(
    x: &DesignMatrix,
    y: &[f64],
    lambda: f64,
    opts: &LassoOptions,
) -> Result<LassoFit> {
    check_response(x, y)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lasso lambda must be >= 0, got {lambda}")));
    }
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(Error::InvalidArgument("lasso needs tol > 0 and max_iter >= 1".into()));
    }
    let p = x.p();
    let norms = x.column_sq_norms();
    let mut b = match &opts.warm_start {
        Some(w) if w.len() == p => w.clone(),
        Some(w) => {
            return Err(Error::DimensionMismatch {
                what: "warm start length",
                expected: p,
                got: w.len(),
            })
        }
        None => vec![0.0; p],
    };
    let mut r = residual(x, y, &b);
    let mut trace = Vec::new();
    if opts.trace {
        trace.push(objective(&r, &b, lambda));
    }

    let all: Vec<usize> = (0..p).collect();
    let inner_tol = 0.1 * opts.tol;
    let mut iterations = 0;
    let mut kkt;
    loop {
        sweep(x, &norms, lambda, &all, &mut b, &mut r);
        iterations += 1;
        if opts.trace {
            trace.push(objective(&r, &b, lambda));
        }
        let active: Vec<usize> = (0..p).filter(|&j| b[j] != 0.0).collect();
        while iterations < opts.max_iter {
            let change = sweep(x, &norms, lambda, &active, &mut b, &mut r);
            iterations += 1;
            if opts.trace {
                trace.push(objective(&r, &b, lambda));
            }
            if change <= inner_tol {
                break;
            }
        }
        // the running residual drifts; judge optimality on a fresh one
        r = residual(x, y, &b);
        kkt = kkt_residual(x, &r, &b, lambda);
        if kkt <= opts.tol || iterations >= opts.max_iter {
            break;
        }
    }
    let estimate = Estimate {
        objective: objective(&r, &b, lambda),
        coefficients: b,
        iterations,
        converged: kkt <= opts.tol,
        kkt_residual: kkt,
        certificate: None,
    };
    Ok(LassoFit { estimate, trace })
}

/// One pass over `coords`; returns the largest gradient-scale change `|delta_j| ||X_j||^2`.
fn sweep(
    x: &DesignMatrix,
    norms: &[f64],
    lambda: f64,
    coords: &[usize],
    b: &mut [f64],
    r: &mut [f64],
) -> f64 {
    let mut largest: f64 = 0.0;
    for &j in coords {
        let nj = norms[j];
        if nj == 0.0 {
            continue;
        }
        let col = x.column(j);
        let old = b[j];
        let rho = dot(col, r) + nj * old;
        let new = soft_threshold(rho, lambda) / nj;
        if new != old {
            let delta = new - old;
            for (ri, xi) in r.iter_mut().zip(col) {
                *ri -= delta * xi;
            }
            b[j] = new;
            largest = largest.max(delta.abs() * nj);
        }
    }
    largest
}

fn residual(x: &DesignMatrix, y: &[f64], b: &[f64]) -> Vec<f64> {
    let fit = x.mul_vec(b);
    y.iter().zip(fit).map(|(a, f)| a - f).collect()
}

fn objective(r: &[f64], b: &[f64], lambda: f64) -> f64 {
    0.5 * dot(r, r) + lambda * b.iter().map(|v| v.abs()).sum::<f64>()
}

/// `max_j dist(X_j^T r, lambda * d|b_j|)` with `r = y - X b`.
pub fn kkt_residual(x: &DesignMatrix, r: &[f64], b: &[f64], lambda: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for (j, &bj) in b.iter().enumerate() {
        let g = dot(x.column(j), r);
        let v = if bj > 0.0 {
            (g - lambda).abs()
        } else if bj < 0.0 {
            (g + lambda).abs()
        } else {
            (g.abs() - lambda).max(0.0)
        };
        worst = worst.max(v);
    }
    worst
}

/// Fits along `lambdas` in the order given, warm-starting each from the previous
/// solution. Pass a decreasing sequence for the usual path behaviour.
pub fn lasso_path(
    x: &DesignMatrix,
    y: &[f64],
    lambdas: &[f64],
    opts: &LassoOptions,
) -> Result<Vec<Estimate>> {
    let mut out = Vec::with_capacity(lambdas.len());
    let mut warm = opts.warm_start.clone();
    for &lambda in lambdas {
        let step = LassoOptions {
            warm_start: warm.take(),
            trace: false,
            ..opts.clone()
        };
        let est = lasso_fit_with(x, y, lambda, &step)?.estimate;
        warm = Some(est.coefficients.clone());
        out.push(est);
    }
    Ok(out)
}

/// `lambda = (1 + eps) sigma sqrt(2 log(p/k))` in the half-scaled convention.
pub fn lasso_default_lambda(p: usize, k: usize, sigma: f64, epsilon: f64) -> Result<Tuning> {
    if k == 0 || p <= k {
        return Err(Error::InvalidArgument(format!("need p > k >= 1 (p = {p}, k = {k})")));
    }
    if !(sigma > 0.0) || !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument("need sigma > 0 and epsilon >= 0".into()));
    }
    let lambda = (1.0 + epsilon) * sigma * (2.0 * (p as f64 / k as f64).ln()).sqrt();
    Ok(Tuning::lasso(lambda).provenance(Provenance::PaperFormula))
}
