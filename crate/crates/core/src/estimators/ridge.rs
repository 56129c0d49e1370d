use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use super::{check_response, half_rss, Estimate, Provenance, Tuning};
use crate::error::{Error, Result};
use crate::model::{DesignMatrix, ParamSpace};

/// Relative pivot size below which an unpenalised Gram matrix counts as singular.
const RANK_TOL: f64 = 1e-12;

/// Ridge estimate `(X^T X + lambda I)^{-1} X^T y`.
///
/// Uses the primal solve when `p <= n` and the kernel form
/// `X^T (X X^T + lambda I)^{-1} y` otherwise, so the cost is cubic in `min(n, p)`.
/// `lambda = 0` is accepted only through the primal solve with a full-rank design.
pub fn ridge_fit(x: &DesignMatrix, y: &[f64], lambda: f64) -> Result<Estimate> {
    check_response(x, y)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("ridge lambda must be >= 0, got {lambda}")));
    }
    let b = if x.p() > x.n() && lambda > 0.0 {
        ridge_dual(x, y, lambda)?
    } else {
        ridge_primal(x, y, lambda)?
    };
    let objective = half_rss(x, y, &b) + 0.5 * lambda * b.iter().map(|v| v * v).sum::<f64>();
    Ok(Estimate::closed_form(b, objective))
}

/// Solve `(X^T X + lambda I) b = X^T y` directly.
pub fn ridge_primal(x: &DesignMatrix, y: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let xm = x.matrix();
    let mut gram = xm.tr_mul(xm);
    let scale = gram.diagonal().max().max(f64::MIN_POSITIVE);
    for j in 0..x.p() {
        gram[(j, j)] += lambda;
    }
    let rhs = xm.tr_mul(&DVector::from_column_slice(y));
    solve_spd(gram, rhs, scale, lambda).map(|v| v.as_slice().to_vec())
}

/// `X^T (X X^T + lambda I)^{-1} y`; requires `lambda > 0`.
pub fn ridge_dual(x: &DesignMatrix, y: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument("dual ridge needs lambda > 0".into()));
    }
    let xm = x.matrix();
    let mut kernel = xm * xm.transpose();
    let scale = kernel.diagonal().max().max(f64::MIN_POSITIVE);
    for i in 0..x.n() {
        kernel[(i, i)] += lambda;
    }
    let alpha = solve_spd(kernel, DVector::from_column_slice(y), scale, lambda)?;
    Ok(xm.tr_mul(&alpha).as_slice().to_vec())
}

fn solve_spd(a: DMatrix<f64>, rhs: DVector<f64>, scale: f64, lambda: f64) -> Result<DVector<f64>> {
    let chol = Cholesky::new(a).ok_or_else(|| {
        Error::Singular("ridge system is not positive definite (lambda = 0 with rank-deficient X?)".into())
    })?;
    if lambda == 0.0 {
        let l = chol.l_dirty();
        let min_pivot = (0..l.nrows()).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
        if min_pivot <= RANK_TOL * scale {
            return Err(Error::Singular("X^T X is rank-deficient and lambda = 0".into()));
        }
    }
    Ok(chol.solve(&rhs))
}

/// `lambda = p sigma^2 / (k tau^2)`, the low-SNR choice.
pub fn ridge_default_lambda(p: usize, space: &ParamSpace) -> Tuning {
    let lambda = p as f64 * space.sigma * space.sigma / space.energy();
    Tuning::ridge(lambda).provenance(Provenance::PaperFormula)
}

/// Spectral form of the ridge solution for fast evaluation over many `lambda`.
///
/// `b(lambda) = B diag(1/(e_i + lambda)) c`, with `B = V` and `c = V^T X^T y`
/// from `X^T X = V E V^T` when `p <= n`, or `B = X^T U` and `c = U^T y` from
/// `X X^T = U E U^T` when `p > n`.
#[derive(Clone, Debug)]
pub struct RidgePath {
    basis: DMatrix<f64>,
    coef: Vec<f64>,
    eig: Vec<f64>,
    /// Diagonal of `B^T B` (ones, or the eigenvalues in the kernel case).
    basis_sq: Vec<f64>,
}

impl RidgePath {
    pub fn new(x: &DesignMatrix, y: &[f64]) -> Result<Self> {
        check_response(x, y)?;
        let xm = x.matrix();
        let yv = DVector::from_column_slice(y);
        if x.p() <= x.n() {
            let eig = SymmetricEigen::new(xm.tr_mul(xm));
            let coef = eig.eigenvectors.tr_mul(&xm.tr_mul(&yv));
            let values: Vec<f64> = eig.eigenvalues.iter().map(|e| e.max(0.0)).collect();
            Ok(Self {
                basis_sq: vec![1.0; values.len()],
                eig: values,
                coef: coef.as_slice().to_vec(),
                basis: eig.eigenvectors,
            })
        } else {
            let eig = SymmetricEigen::new(xm * xm.transpose());
            let coef = eig.eigenvectors.tr_mul(&yv);
            let values: Vec<f64> = eig.eigenvalues.iter().map(|e| e.max(0.0)).collect();
            Ok(Self {
                basis: xm.tr_mul(&eig.eigenvectors),
                basis_sq: values.clone(),
                eig: values,
                coef: coef.as_slice().to_vec(),
            })
        }
    }

    fn weights(&self, lambda: f64) -> Vec<f64> {
        self.eig
            .iter()
            .zip(&self.coef)
            .map(|(e, c)| if e + lambda > 0.0 { c / (e + lambda) } else { 0.0 })
            .collect()
    }

    pub fn coefficients(&self, lambda: f64) -> Vec<f64> {
        let w = DVector::from_vec(self.weights(lambda));
        (&self.basis * w).as_slice().to_vec()
    }

    /// Projection `B^T beta`, reused by [`RidgePath::sq_error`].
    pub fn project(&self, beta: &[f64]) -> Vec<f64> {
        self.basis.tr_mul(&DVector::from_column_slice(beta)).as_slice().to_vec()
    }

    /// `||b(lambda) - beta||^2` in `O(min(n, p))` given `proj = B^T beta` and `||beta||^2`.
    pub fn sq_error(&self, lambda: f64, proj: &[f64], beta_sq: f64) -> f64 {
        let w = self.weights(lambda);
        let mut fit_sq = 0.0;
        let mut cross = 0.0;
        for i in 0..w.len() {
            fit_sq += self.basis_sq[i] * w[i] * w[i];
            cross += proj[i] * w[i];
        }
        (fit_sq - 2.0 * cross + beta_sq).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gen_design, RngStream};

    fn instance(n: usize, p: usize, seed: u64) -> (DesignMatrix, Vec<f64>) {
        let mut r = RngStream::new(seed, 0);
        let x = gen_design(n, p, &mut r).unwrap();
        let y = (0..n).map(|_| r.standard_normal()).collect();
        (x, y)
    }

    #[test]
    fn identity_design_halves() {
        let x = DesignMatrix::identity(4);
        let y = [2.0, -4.0, 1.0, 0.0];
        let b = ridge_fit(&x, &y, 1.0).unwrap().coefficients;
        for (u, v) in b.iter().zip([1.0, -2.0, 0.5, 0.0]) {
            assert!((u - v).abs() < 1e-15);
        }
    }

    #[test]
    fn huge_penalty_bound() {
        let (x, y) = instance(10, 30, 1);
        let b = ridge_fit(&x, &y, 1e12).unwrap().coefficients;
        let xty = x.tr_mul_vec(&y);
        let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nx = xty.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(nb <= nx / 1e12);
    }

    #[test]
    fn primal_dual_agree() {
        for (n, p, seed) in [(3, 2, 5), (20, 60, 6), (60, 20, 7)] {
            let (x, y) = instance(n, p, seed);
            let a = ridge_primal(&x, &y, 0.7).unwrap();
            let b = ridge_dual(&x, &y, 0.7).unwrap();
            let scale = a.iter().map(|v| v.abs()).fold(0.0, f64::max);
            for (u, v) in a.iter().zip(&b) {
                assert!((u - v).abs() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn zero_lambda_rank_deficient() {
        let (x, y) = instance(5, 8, 2);
        assert!(matches!(ridge_fit(&x, &y, 0.0), Err(Error::Singular(_))));
        let (x, y) = instance(30, 4, 3);
        assert!(ridge_fit(&x, &y, 0.0).is_ok());
    }

    #[test]
    fn default_lambda_examples() {
        let t = ridge_default_lambda(1000, &ParamSpace::new(10, 1.0, 1.0).unwrap());
        assert!((t.lambda - 100.0).abs() < 1e-12);
        assert_eq!(t.provenance, Provenance::PaperFormula);
        let t = ridge_default_lambda(500, &ParamSpace::new(12, 0.5, 1.0).unwrap());
        assert!((t.lambda - 500.0 / 3.0).abs() < 1e-10);
        let t2 = ridge_default_lambda(500, &ParamSpace::new(12, 1.5, 3.0).unwrap());
        assert!((t.lambda - t2.lambda).abs() < 1e-10);
    }

    #[test]
    fn path_matches_direct_solve() {
        for (n, p) in [(25, 10), (10, 25)] {
            let (x, y) = instance(n, p, 11);
            let path = RidgePath::new(&x, &y).unwrap();
            let beta: Vec<f64> = (0..p).map(|j| if j % 3 == 0 { 1.0 } else { 0.0 }).collect();
            let proj = path.project(&beta);
            let beta_sq: f64 = beta.iter().map(|v| v * v).sum();
            for lambda in [0.01, 1.0, 50.0] {
                let direct = ridge_fit(&x, &y, lambda).unwrap().coefficients;
                let via_path = path.coefficients(lambda);
                for (a, b) in direct.iter().zip(&via_path) {
                    assert!((a - b).abs() < 1e-9);
                }
                let err: f64 = direct.iter().zip(&beta).map(|(a, b)| (a - b) * (a - b)).sum();
                assert!((path.sq_error(lambda, &proj, beta_sq) - err).abs() < 1e-9 * (1.0 + err));
            }
        }
    }
}
