//! Best subset selection: the support of size `k` with the smallest residual
//! sum of squares.
//!
//! The branch-and-bound search walks supports depth first in a fixed variable
//! order (decreasing absolute correlation with `y`). Each node keeps the Gram
//! matrix and `X^T y` of the remaining candidates with the chosen variables
//! swept out, so adding a variable `j` lowers the RSS by `c_j^2 / G_jj` and
//! updates the rest with one rank-one correction. Supports are scored two
//! levels before the leaves, where a pair `(a, j)` costs a handful of flops.
//!
//! A subtree is cut when `RSS(F u C)`, the RSS of the chosen set plus all its
//! remaining candidates, already exceeds the incumbent: RSS can only grow when
//! variables are removed, so nothing inside can win.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_response, Certificate, Estimate};
use crate::error::{Error, Result};
use crate::model::DesignMatrix;

/// Default cap on visited partial supports.
pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000;
/// A swept pivot below this fraction of the raw column norm is treated as collinear.
const PIVOT_TOL: f64 = 1e-10;
/// Largest candidate set for which the subtree bound is evaluated.
const BOUND_MAX_FREE: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BssMode {
    Exhaustive,
    BranchAndBound,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BssReport {
    pub estimate: Estimate,
    /// Sorted support of the returned fit.
    pub support: Vec<usize>,
    pub rss: f64,
    /// Partial supports visited (branch and bound) or supports scored (exhaustive).
    pub nodes: u64,
}

/// Best subset of size `k`.
///
/// Exhaustive mode refuses to run when `C(p, k)` exceeds `budget`. Branch and
/// bound stops after `budget` partial supports and then returns the incumbent
/// with [`Certificate::HeuristicOnly`]. Supports with a numerically singular
/// Gram block are skipped; exact ties go to the lexicographically smallest
/// support.
pub fn bss_fit(x: &DesignMatrix, y: &[f64], k: usize, mode: BssMode, budget: u64) -> Result<Estimate> {
    Ok(bss_fit_report(x, y, k, mode, budget)?.estimate)
}

pub fn bss_fit_report(
    x: &DesignMatrix,
    y: &[f64],
    k: usize,
    mode: BssMode,
    budget: u64,
) -> Result<BssReport> {
    check_response(x, y)?;
    let (n, p) = (x.n(), x.p());
    if k == 0 || k > n.min(p) {
        return Err(Error::InvalidArgument(format!(
            "best subset needs 1 <= k <= min(n, p) = {}, got {k}",
            n.min(p)
        )));
    }
    let xm = x.matrix();
    let gram = xm.tr_mul(xm);
    let xty = xm.tr_mul(&DVector::from_column_slice(y));
    let yy: f64 = y.iter().map(|v| v * v).sum();

    let (support, nodes, certificate) = match mode {
        BssMode::Exhaustive => {
            let needed = binomial(p, k);
            if needed > budget as u128 {
                return Err(Error::BudgetExceeded {
                    needed,
                    budget: budget as u128,
                });
            }
            let (support, nodes) = exhaustive(&gram, &xty, yy, k);
            (support, nodes, Certificate::Exact)
        }
        BssMode::BranchAndBound => {
            let mut search = Search::new(&gram, &xty, yy, k, n, budget);
            search.seed_greedy(&gram, &xty, yy);
            let m = p;
            let g: Vec<f64> = (0..m * m)
                .map(|idx| gram[(search.order[idx / m], search.order[idx % m])])
                .collect();
            let c: Vec<f64> = search.order.iter().map(|&j| xty[j]).collect();
            search.visit(0, &g, &c, yy);
            let cert = if search.exhausted {
                Certificate::HeuristicOnly
            } else {
                Certificate::BranchAndBoundOptimal
            };
            (search.best, search.nodes, cert)
        }
    };

    let (coefficients, rss) = refit(x, y, &support);
    Ok(BssReport {
        estimate: Estimate {
            coefficients,
            objective: rss,
            iterations: nodes.min(usize::MAX as u64) as usize,
            converged: certificate != Certificate::HeuristicOnly,
            kkt_residual: 0.0,
            certificate: Some(certificate),
        },
        support,
        rss,
        nodes,
    })
}

/// `C(p, k)`, saturating at `u128::MAX`.
pub fn binomial(p: usize, k: usize) -> u128 {
    if k > p {
        return 0;
    }
    let k = k.min(p - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((p - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn refit(x: &DesignMatrix, y: &[f64], support: &[usize]) -> (Vec<f64>, f64) {
    let mut b = vec![0.0; x.p()];
    if !support.is_empty() {
        let xs = x.matrix().select_columns(support);
        let yv = DVector::from_column_slice(y);
        let sol = xs
            .clone()
            .svd(true, true)
            .solve(&yv, 1e-12)
            .expect("SVD computed with both factors");
        for (&j, v) in support.iter().zip(sol.iter()) {
            b[j] = *v;
        }
    }
    let fit = x.mul_vec(&b);
    let rss = y.iter().zip(fit).map(|(a, f)| (a - f) * (a - f)).sum();
    (b, rss)
}

fn subset_rss(gram: &DMatrix<f64>, xty: &DVector<f64>, yy: f64, support: &[usize]) -> Option<f64> {
    let s = support.len();
    let g = DMatrix::from_fn(s, s, |a, b| gram[(support[a], support[b])]);
    let c = DVector::from_fn(s, |a, _| xty[support[a]]);
    let chol = Cholesky::new(g)?;
    let l = chol.l_dirty();
    for (a, &j) in support.iter().enumerate() {
        if l[(a, a)] * l[(a, a)] <= PIVOT_TOL * gram[(j, j)] {
            return None;
        }
    }
    let w = chol.solve(&c);
    Some(yy - c.dot(&w))
}

fn exhaustive(gram: &DMatrix<f64>, xty: &DVector<f64>, yy: f64, k: usize) -> (Vec<usize>, u64) {
    let p = gram.nrows();
    let mut combo: Vec<usize> = (0..k).collect();
    let mut best = combo.clone();
    let mut best_rss = f64::INFINITY;
    let mut count = 0u64;
    loop {
        count += 1;
        if let Some(rss) = subset_rss(gram, xty, yy, &combo) {
            // lexicographic enumeration: keep the first of equal values
            if rss < best_rss {
                best_rss = rss;
                best.clone_from(&combo);
            }
        }
        // next combination in lexicographic order
        let mut i = k;
        while i > 0 && combo[i - 1] == p - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        combo[i - 1] += 1;
        for j in i..k {
            combo[j] = combo[j - 1] + 1;
        }
    }
    (best, count)
}

struct Search {
    k: usize,
    n: usize,
    /// Search position -> column index.
    order: Vec<usize>,
    /// Raw `G_jj` by search position, for the collinearity test.
    diag0: Vec<f64>,
    budget: u64,
    nodes: u64,
    exhausted: bool,
    margin: f64,
    best_rss: f64,
    best: Vec<usize>,
    chosen: Vec<usize>,
    scratch: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Search {
    fn new(gram: &DMatrix<f64>, xty: &DVector<f64>, yy: f64, k: usize, n: usize, budget: u64) -> Self {
        let p = gram.nrows();
        let score = |j: usize| {
            let d = gram[(j, j)];
            if d > 0.0 {
                xty[j].abs() / d.sqrt()
            } else {
                0.0
            }
        };
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| score(b).total_cmp(&score(a)).then(a.cmp(&b)));
        let diag0 = order.iter().map(|&j| gram[(j, j)]).collect();
        Self {
            k,
            n,
            order,
            diag0,
            budget,
            nodes: 0,
            exhausted: false,
            margin: 1e-10 * yy.max(f64::MIN_POSITIVE),
            best_rss: f64::INFINITY,
            best: Vec::new(),
            chosen: Vec::with_capacity(k),
            scratch: vec![(Vec::new(), Vec::new()); k + 1],
        }
    }

    fn offer(&mut self, rss: f64, extra: &[usize]) {
        if rss > self.best_rss {
            return;
        }
        let mut s: Vec<usize> = self
            .chosen
            .iter()
            .chain(extra)
            .map(|&q| self.order[q])
            .collect();
        s.sort_unstable();
        if rss < self.best_rss || s < self.best {
            self.best_rss = rss;
            self.best = s;
        }
    }

    fn pivot_ok(&self, d: f64, pos: usize) -> bool {
        d > PIVOT_TOL * self.diag0[pos]
    }

    /// Forward selection, to start with a reasonable incumbent.
    fn seed_greedy(&mut self, gram: &DMatrix<f64>, xty: &DVector<f64>, yy: f64) {
        let p = self.order.len();
        let mut g: Vec<f64> = (0..p * p)
            .map(|idx| gram[(self.order[idx / p], self.order[idx % p])])
            .collect();
        let mut c: Vec<f64> = self.order.iter().map(|&j| xty[j]).collect();
        let mut rss = yy;
        let mut taken = vec![false; p];
        for _ in 0..self.k {
            let mut pick = None;
            let mut best_gain = -1.0;
            for t in 0..p {
                let d = g[t * p + t];
                if taken[t] || !self.pivot_ok(d, t) {
                    continue;
                }
                let gain = c[t] * c[t] / d;
                if gain > best_gain {
                    best_gain = gain;
                    pick = Some(t);
                }
            }
            let Some(t) = pick else { break };
            taken[t] = true;
            self.chosen.push(t);
            rss -= best_gain;
            let d = g[t * p + t];
            let row_t: Vec<f64> = g[t * p..(t + 1) * p].to_vec();
            let ct = c[t];
            for a in 0..p {
                let f = g[a * p + t] / d;
                if f != 0.0 {
                    for b in 0..p {
                        g[a * p + b] -= f * row_t[b];
                    }
                    c[a] -= f * ct;
                }
            }
        }
        self.offer(rss, &[]);
        self.chosen.clear();
    }

    /// `g` is the swept Gram block of the candidates `start..p` (row-major,
    /// `m x m`), `c` the matching swept `X^T y`, `rss` the RSS of `chosen`.
    fn visit(&mut self, start: usize, g: &[f64], c: &[f64], rss: f64) {
        let m = c.len();
        let r = self.chosen.len();
        let remaining = self.k - r;
        self.offer(rss, &[]);
        if remaining == 0 || m == 0 || self.exhausted {
            return;
        }
        if remaining == 1 {
            for t in 0..m {
                let d = g[t * m + t];
                if !self.pivot_ok(d, start + t) {
                    continue;
                }
                let cand = rss - c[t] * c[t] / d;
                if cand <= self.best_rss {
                    self.offer(cand, &[start + t]);
                }
            }
            return;
        }
        if remaining == 2 {
            self.score_pairs(start, g, c, rss);
            return;
        }
        if m <= BOUND_MAX_FREE && r + m <= self.n {
            if let Some(bound) = subtree_bound(g, c, rss) {
                if bound > self.best_rss + self.margin {
                    return;
                }
            }
        }
        let (mut g_child, mut c_child) = std::mem::take(&mut self.scratch[r]);
        for t in 0..m {
            if m - t - 1 < remaining - 1 || self.exhausted {
                break;
            }
            let d = g[t * m + t];
            if !self.pivot_ok(d, start + t) {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                self.exhausted = true;
                break;
            }
            let mc = m - t - 1;
            g_child.clear();
            g_child.resize(mc * mc, 0.0);
            c_child.clear();
            let row_t = &g[t * m..(t + 1) * m];
            for a in 0..mc {
                let ia = t + 1 + a;
                let f = g[ia * m + t] / d;
                let src = &g[ia * m + t + 1..(ia + 1) * m];
                let dst = &mut g_child[a * mc..(a + 1) * mc];
                for ((o, s), rt) in dst.iter_mut().zip(src).zip(&row_t[t + 1..]) {
                    *o = s - f * rt;
                }
                c_child.push(c[ia] - f * c[t]);
            }
            self.chosen.push(start + t);
            self.visit(start + t + 1, &g_child, &c_child, rss - c[t] * c[t] / d);
            self.chosen.pop();
        }
        self.scratch[r] = (g_child, c_child);
    }

    fn score_pairs(&mut self, start: usize, g: &[f64], c: &[f64], rss: f64) {
        let m = c.len();
        let diag: Vec<f64> = (0..m).map(|t| g[t * m + t]).collect();
        let floor: Vec<f64> = (0..m).map(|t| PIVOT_TOL * self.diag0[start + t]).collect();
        for a in 0..m {
            let da = diag[a];
            if da <= floor[a] {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                self.exhausted = true;
                return;
            }
            let ratio = c[a] / da;
            let rss_a = rss - c[a] * ratio;
            if rss_a <= self.best_rss {
                self.offer(rss_a, &[start + a]);
            }
            let row = &g[a * m..(a + 1) * m];
            let mut local_best = self.best_rss;
            let mut local_arg = usize::MAX;
            for j in a + 1..m {
                let gja = row[j];
                let dj = diag[j] - gja * gja / da;
                if dj <= floor[j] {
                    continue;
                }
                let cj = c[j] - gja * ratio;
                let cand = rss_a - cj * cj / dj;
                if cand < local_best {
                    local_best = cand;
                    local_arg = j;
                } else if cand == local_best {
                    // exact tie: `offer` settles it by support order
                    self.offer(cand, &[start + a, start + j]);
                }
            }
            if local_arg != usize::MAX {
                self.offer(local_best, &[start + a, start + local_arg]);
            }
        }
    }
}

/// `RSS(F u C) = rss - c^T G^{-1} c` on the swept block, if it is positive definite.
fn subtree_bound(g: &[f64], c: &[f64], rss: f64) -> Option<f64> {
    let m = c.len();
    let chol = Cholesky::new(DMatrix::from_row_slice(m, m, g))?;
    let cv = DVector::from_column_slice(c);
    let w = chol.solve(&cv);
    Some(rss - cv.dot(&w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gen_design, RngStream};

    fn instance(n: usize, p: usize, seed: u64) -> (DesignMatrix, Vec<f64>) {
        let mut r = RngStream::new(seed, 17);
        let x = gen_design(n, p, &mut r).unwrap();
        let y = (0..n)
            .map(|i| {
                let signal: f64 = [0, 3, 7].iter().map(|&j| x.matrix()[(i, j)]).sum();
                signal + 0.5 * r.standard_normal()
            })
            .collect();
        (x, y)
    }

    #[test]
    fn identity_picks_largest() {
        let x = DesignMatrix::identity(3);
        let rep = bss_fit_report(&x, &[3.0, 1.0, 0.0], 1, BssMode::BranchAndBound, 100).unwrap();
        assert_eq!(rep.support, vec![0]);
        assert_eq!(rep.estimate.coefficients, vec![3.0, 0.0, 0.0]);
        assert!((rep.rss - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthonormal_columns_pick_top_correlations() {
        let q = DMatrix::from_fn(12, 12, |i, j| ((i * 5 + j * 7) % 13) as f64 - 6.0).qr().q();
        let x = DesignMatrix::from_matrix(q.columns(0, 9).into_owned()).unwrap();
        let y: Vec<f64> = (0..12).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
        let xty = x.tr_mul_vec(&y);
        let mut idx: Vec<usize> = (0..9).collect();
        idx.sort_by(|&a, &b| xty[b].abs().total_cmp(&xty[a].abs()));
        for k in 1..=5 {
            let mut want = idx[..k].to_vec();
            want.sort_unstable();
            let rep = bss_fit_report(&x, &y, k, BssMode::BranchAndBound, 1_000_000).unwrap();
            assert_eq!(rep.support, want, "k = {k}");
        }
    }

    #[test]
    fn branch_and_bound_matches_exhaustive() {
        for seed in 0..20 {
            let (x, y) = instance(30, 14, seed);
            for k in [1, 2, 3, 4, 6] {
                let a = bss_fit_report(&x, &y, k, BssMode::Exhaustive, 10_000).unwrap();
                let b = bss_fit_report(&x, &y, k, BssMode::BranchAndBound, 1_000_000).unwrap();
                assert!((a.rss - b.rss).abs() <= 1e-9, "seed {seed}, k {k}");
                assert_eq!(b.estimate.certificate, Some(Certificate::BranchAndBoundOptimal));
                assert_eq!(a.estimate.certificate, Some(Certificate::Exact));
            }
        }
    }

    #[test]
    fn exhaustive_budget_enforced() {
        let (x, y) = instance(30, 14, 1);
        let err = bss_fit(&x, &y, 4, BssMode::Exhaustive, 1000).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { needed: 1001, budget: 1000 }));
    }

    #[test]
    fn tiny_budget_is_heuristic() {
        let (x, y) = instance(30, 14, 2);
        let rep = bss_fit_report(&x, &y, 4, BssMode::BranchAndBound, 3).unwrap();
        assert_eq!(rep.estimate.certificate, Some(Certificate::HeuristicOnly));
        assert_eq!(rep.support.len(), 4);
        assert!(!rep.estimate.converged);
    }

    #[test]
    fn duplicate_columns_tie_to_smallest_support() {
        let mut r = RngStream::new(3, 3);
        let base = gen_design(10, 3, &mut r).unwrap();
        let m = base.matrix();
        // columns 0 and 2 identical
        let x = DesignMatrix::from_matrix(DMatrix::from_fn(10, 4, |i, j| match j {
            3 => m[(i, 1)] * 0.5 + m[(i, 2)],
            2 => m[(i, 0)],
            _ => m[(i, j)],
        }))
        .unwrap();
        let y: Vec<f64> = (0..10).map(|i| 2.0 * m[(i, 0)] + 0.1 * r.standard_normal()).collect();
        let bb = bss_fit_report(&x, &y, 1, BssMode::BranchAndBound, 1000).unwrap();
        let ex = bss_fit_report(&x, &y, 1, BssMode::Exhaustive, 1000).unwrap();
        assert_eq!(bb.support, vec![0]);
        assert_eq!(ex.support, vec![0]);
        // {0, 2} is singular and must never be returned
        let bb2 = bss_fit_report(&x, &y, 2, BssMode::BranchAndBound, 1000).unwrap();
        assert_ne!(bb2.support, vec![0, 2]);
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(14, 4), 1001);
        assert_eq!(binomial(150, 5), 591_600_030);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(10_000, 5_000), u128::MAX);
    }
}
