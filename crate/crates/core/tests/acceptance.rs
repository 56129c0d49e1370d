//! End-to-end acceptance checks. Each test prints one `criterion N: PASS|FAIL` line.
//!
//! Run with `cargo test -p snrlab-core --test acceptance -- --nocapture` to see
//! the summary lines.

use std::time::Instant;

use snrlab_core::bayes::{bayes_risk_mc, spike_posterior, spike_trials, SpikePriorConfig};
use snrlab_core::estimators::bss::bss_fit_report;
use snrlab_core::estimators::enet::enet_from_correlations;
use snrlab_core::estimators::ridge::{ridge_dual, ridge_primal};
use snrlab_core::estimators::{lasso_fit, ridge_fit, BssMode, Certificate, Family};
use snrlab_core::harness::{
    csv_string, emit_plot, run_sweep, write_csv, OverlaySpec, PlotOptions, RecordStatus, SweepConfig,
    SweepResult, TuningMode,
};
use snrlab_core::model::{gen_design, Dataset, DatasetShape, DesignMatrix, RngStream, SignPattern};
use snrlab_core::theory::{soft_risk, soft_threshold, worst_pair_risk, SoftRiskParams};

fn report(n: usize, ok: bool, detail: String) {
    println!("criterion {n}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {detail}");
}

fn dataset(n: usize, p: usize, k: usize, sigma: f64, seed: u64, id: u64) -> Dataset {
    let shape = DatasetShape { n, p, k, tau: 1.0, signs: SignPattern::Positive };
    Dataset::generate(&shape, sigma, seed, id).unwrap()
}

/// `a` beats `b` at `inv` by at least `m` paired standard errors.
fn beats(r: &SweepResult, a: Family, b: Family, inv: f64, m: f64) -> (bool, f64, f64) {
    let d = r.paired_difference(a, b, inv).unwrap();
    (-d.mean >= m * d.se, d.mean, d.se)
}

#[test]
fn criterion_01_snr_ordering() {
    let start = Instant::now();
    let grid = vec![0.2, 0.7, 1.0, 1.4, 2.0, 5.0];
    let mut cfg = SweepConfig::new(
        500,
        1000,
        25,
        1.0,
        grid.clone(),
        100,
        vec![Family::Ridge, Family::Lasso, Family::ElasticNet],
        20240601,
    );
    cfg.tuning_mode = TuningMode::Oracle;
    let r = run_sweep(&cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    for c in &r.cells {
        println!(
            "  {:<6} inv_snr {:>4}: {:.4} +- {:.4} ({} trials)",
            c.estimator.name(),
            c.inv_snr,
            c.mean_scaled_mse,
            c.se_scaled_mse,
            c.trials
        );
    }
    let (a, am, ase) = beats(&r, Family::Ridge, Family::Lasso, 5.0, 3.0);
    let (b, bm, bse) = beats(&r, Family::Ridge, Family::ElasticNet, 5.0, 1.0);
    let (c, cm, cse) = beats(&r, Family::Lasso, Family::Ridge, 0.2, 3.0);
    let mut mid = Vec::new();
    for &inv in grid.iter().filter(|v| (0.7..=2.0).contains(*v)) {
        let best_other = if r.cell(Family::Ridge, inv).unwrap().mean_scaled_mse
            <= r.cell(Family::Lasso, inv).unwrap().mean_scaled_mse
        {
            Family::Ridge
        } else {
            Family::Lasso
        };
        let d = r.paired_difference(Family::ElasticNet, best_other, inv).unwrap();
        mid.push((inv, d.mean <= d.se, d.mean, d.se));
    }
    let d = mid.iter().any(|m| m.1);
    let ok = a && b && c && d && secs <= 600.0;
    report(
        1,
        ok,
        format!(
            "ridge-lasso at 5: {am:.4} (se {ase:.4}); ridge-enet at 5: {bm:.4} (se {bse:.4}); \
             lasso-ridge at 0.2: {cm:.4} (se {cse:.4}); enet-best mid grid: {mid:?}; {secs:.0}s"
        ),
    );
}

#[test]
fn criterion_02_ridge_second_order() {
    let (n, p, k, sigma, tau) = (500, 500, 50, 1.0, 0.4);
    let mut cfg = SweepConfig::new(n, p, k, tau, vec![sigma / tau], 500, vec![Family::Ridge], 7);
    cfg.tuning_mode = TuningMode::Paper;
    let r = run_sweep(&cfg).unwrap();
    let cell = &r.cells[0];
    let energy = k as f64 * tau * tau;
    let ratio = cell.mean_unscaled_mse / energy;
    let gain = (energy - cell.mean_unscaled_mse) / (energy * energy / (p as f64 * sigma * sigma));
    let ok = (0.90..=1.00).contains(&ratio) && (0.3..=3.0).contains(&gain) && cell.trials == 500;
    report(2, ok, format!("risk/k tau^2 = {ratio:.5}, gain = {gain:.3}, se = {:.5}", cell.se_unscaled_mse / energy));
}

#[test]
fn criterion_03_enet_upper_bound_direction() {
    let (n, p, k, sigma, tau) = (2000, 1000, 10, 1.0, 1.0);
    let mut cfg = SweepConfig::new(n, p, k, tau, vec![sigma / tau], 200, vec![Family::ElasticNet], 11);
    cfg.tuning_mode = TuningMode::Paper;
    let r = run_sweep(&cfg).unwrap();
    let tuning = r.tunings[0].tuning.clone().unwrap();
    let cell = &r.cells[0];
    let energy = k as f64 * tau * tau;
    let mu: f64 = tau / sigma;
    let required = 0.5 * (2.0 / (2.0 * std::f64::consts::PI).sqrt()) * (k as f64 / p as f64) * (mu * mu).exp() / mu;
    let gain = (energy - cell.mean_unscaled_mse) / energy;
    let ok = cell.mean_unscaled_mse < energy && gain >= required && cell.trials == 200;
    report(
        3,
        ok,
        format!(
            "gamma = {:.3}, risk = {:.4} +- {:.4}, relative gain = {gain:.5}, required {required:.5}",
            tuning.gamma, cell.mean_unscaled_mse, cell.se_unscaled_mse
        ),
    );
}

#[test]
fn criterion_04_high_snr_lasso_constant() {
    let (n, p, k, sigma) = (500, 1000, 10, 1.0);
    let log_pk = (p as f64 / k as f64).ln();
    let tau = 3.0 * (2.0 * log_pk).sqrt();
    let mut cfg = SweepConfig::new(n, p, k, tau, vec![sigma / tau], 100, vec![Family::Lasso], 13);
    cfg.tuning_mode = TuningMode::Oracle;
    let r = run_sweep(&cfg).unwrap();
    let cell = &r.cells[0];
    let ratio = cell.mean_unscaled_mse / (2.0 * sigma * sigma * k as f64 * log_pk);
    let ok = (0.4..=1.5).contains(&ratio) && cell.trials == 100;
    report(4, ok, format!("risk / (2 sigma^2 k log(p/k)) = {ratio:.4}, lambda = {:?}", r.tunings[0].tuning));
}

#[test]
fn criterion_05_best_subset_low_snr() {
    let (n, p, k, tau, sigma) = (75, 150, 5, 1.0, 10.0);
    let mut cfg = SweepConfig::new(n, p, k, tau, vec![sigma / tau], 50, vec![Family::Ridge, Family::BestSubset], 17);
    cfg.tuning_mode = TuningMode::Oracle;
    cfg.solver.bss_budget = 200_000_000;
    let start = Instant::now();
    let r = run_sweep(&cfg).unwrap();
    let certified = r
        .records
        .iter()
        .filter(|x| x.estimator == Family::BestSubset)
        .all(|x| x.status == RecordStatus::Ok);
    let ridge = r.cell(Family::Ridge, 10.0).unwrap().mean_unscaled_mse;
    let bss = r.cell(Family::BestSubset, 10.0).unwrap().mean_unscaled_mse;
    let ok = certified && bss >= 5.0 * ridge;
    report(
        5,
        ok,
        format!(
            "bss {bss:.3}, ridge {ridge:.3}, ratio {:.2}, all certified: {certified}, {:.0}s",
            bss / ridge,
            start.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_06_bss_matches_exhaustive() {
    let mut worst: f64 = 0.0;
    let mut all_certified = true;
    for seed in 0..50 {
        let d = dataset(30, 14, 4, 1.0, 600 + seed, 0);
        let bb = bss_fit_report(&d.x, &d.y, 4, BssMode::BranchAndBound, 1_000_000).unwrap();
        let ex = bss_fit_report(&d.x, &d.y, 4, BssMode::Exhaustive, 1_000_000).unwrap();
        worst = worst.max((bb.rss - ex.rss).abs());
        all_certified &= bb.estimate.certificate == Some(Certificate::BranchAndBoundOptimal);
    }
    report(6, worst <= 1e-9 && all_certified, format!("max |rss diff| = {worst:.2e}, all certified: {all_certified}"));
}

#[test]
fn criterion_07_lasso_kkt() {
    let mut worst: f64 = 0.0;
    let mut converged = 0;
    let mut total = 0;
    for (n, p) in [(50, 20), (50, 200)] {
        for seed in 0..50u64 {
            let d = dataset(n, p, 5, 0.5, 700 + seed, p as u64);
            let xty = d.x.tr_mul_vec(&d.y);
            let lmax = xty.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let lambda = lmax * [0.02, 0.1, 0.3, 0.6, 0.9][seed as usize % 5];
            let est = lasso_fit(&d.x, &d.y, lambda, 1e-9, 100_000).unwrap();
            total += 1;
            if !est.converged {
                continue;
            }
            converged += 1;
            // stationarity recomputed from scratch
            let fit = d.x.mul_vec(&est.coefficients);
            let r: Vec<f64> = d.y.iter().zip(&fit).map(|(a, b)| a - b).collect();
            let g = d.x.tr_mul_vec(&r);
            for (gj, bj) in g.iter().zip(&est.coefficients) {
                let v = if *bj != 0.0 { (gj - lambda * bj.signum()).abs() } else { (gj.abs() - lambda).max(0.0) };
                worst = worst.max(v);
            }
        }
    }
    report(7, worst <= 1e-6 && converged == total, format!("{converged}/{total} converged, max violation {worst:.2e}"));
}

#[test]
fn criterion_08_soft_risk_vs_monte_carlo() {
    let draws = 1_000_000;
    let mut worst_z: f64 = 0.0;
    let mut points = 0;
    for (iu, &u) in [0.0, 0.5, 1.5, 3.0, 6.0].iter().enumerate() {
        for (i1, &chi1) in [0.0, 0.5, 1.0, 2.0, 4.0].iter().enumerate() {
            for (i2, &chi2) in [0.0, 0.5, 3.0].iter().enumerate() {
                let params = SoftRiskParams::new(chi1, chi2, 1.0).unwrap();
                let closed = soft_risk(u, &params);
                let mut rng = RngStream::new(88, (iu * 100 + i1 * 10 + i2) as u64);
                let (mut s, mut s2) = (0.0, 0.0);
                for _ in 0..draws {
                    let e = rng.standard_normal();
                    let d = soft_threshold(u + e, chi1) / (1.0 + chi2) - u;
                    let l = d * d;
                    s += l;
                    s2 += l * l;
                }
                let mean = s / draws as f64;
                let se = ((s2 / draws as f64 - mean * mean) / draws as f64).sqrt();
                worst_z = worst_z.max((closed - mean).abs() / se);
                points += 1;
            }
        }
    }
    // nondecreasing on u in {0, 0.1, ..., 5}
    let mut monotone = true;
    for (chi1, chi2) in [(0.5, 0.0), (1.0, 0.0), (2.0, 0.5), (0.5, 3.0), (4.0, 3.0)] {
        let params = SoftRiskParams::new(chi1, chi2, 1.0).unwrap();
        let mut prev = soft_risk(0.0, &params);
        for i in 1..=50 {
            let cur = soft_risk(i as f64 * 0.1, &params);
            monotone &= cur >= prev;
            prev = cur;
        }
    }
    // r(x) + r(y) on the circle never exceeds the value at x = y
    let mut circle = true;
    for (chi1, chi2) in [(1.0, 0.0), (2.0, 0.5), (0.5, 3.0)] {
        let params = SoftRiskParams::new(chi1, chi2, 1.0).unwrap();
        for c in [0.3, 1.0, 2.5, 6.0] {
            let worst = worst_pair_risk(c, &params).unwrap();
            for i in 0..32 {
                let t = 2.0 * std::f64::consts::PI * i as f64 / 32.0;
                circle &= soft_risk(c * t.cos(), &params) + soft_risk(c * t.sin(), &params) <= worst + 1e-10;
            }
        }
    }
    report(
        8,
        points == 75 && worst_z <= 4.0 && monotone && circle,
        format!("{points} points, max |closed - mc| / se = {worst_z:.2}, monotone: {monotone}, circle: {circle}"),
    );
}

#[test]
fn criterion_09_lower_bound_diagnostics() {
    let (n, m) = (300, 300);
    let lambda = 0.5 * (2.0 * (m as f64).ln()).sqrt();
    let s = spike_trials(n, m, lambda, 200, &RngStream::new(909, 0)).unwrap();
    let med = s.median_p1();
    let a = s.mean_a();
    let frac = s.frac_log_b_at_least(10f64.ln());
    let cfg = SpikePriorConfig::new(m, lambda, false).unwrap();
    let risk = bayes_risk_mc(&cfg, n, 400, &RngStream::new(909, 1)).unwrap();
    let ok = med <= 0.1 && (0.5..=2.0).contains(&a.mean) && frac >= 0.9 && risk.mean >= 0.7 * lambda * lambda;
    report(
        9,
        ok,
        format!(
            "median p1 = {med:.4}, mean A = {:.3}, P(log B >= log 10) = {frac:.3}, risk / lambda^2 = {:.3} +- {:.3}",
            a.mean,
            risk.mean / (lambda * lambda),
            risk.se / (lambda * lambda)
        ),
    );
}

fn rel_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * scale)
}

fn sweep_outputs(cfg: &SweepConfig, threads: usize, dir: &std::path::Path, tag: &str) -> (Vec<u8>, Vec<u8>) {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let r = pool.install(|| run_sweep(cfg).unwrap());
    let csv = dir.join(format!("{tag}.csv"));
    let svg = dir.join(format!("{tag}.svg"));
    write_csv(&r, &csv).unwrap();
    let opts = PlotOptions { theory: Some(OverlaySpec { p: cfg.p, k: cfg.k, tau: cfg.tau }), ..PlotOptions::default() };
    emit_plot(&csv, &svg, &opts).unwrap();
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), csv_string(&r));
    (std::fs::read(csv).unwrap(), std::fs::read(svg).unwrap())
}

#[test]
fn criterion_10_exact_invariants() {
    let mut rng = RngStream::new(1010, 0);
    let mut homogeneous = true;
    let mut primal_dual = true;
    for (n, p) in [(40, 15), (15, 40)] {
        let x = gen_design(n, p, &mut rng).unwrap();
        let y: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        for c in [0.5, 3.0, 1e3] {
            let cy: Vec<f64> = y.iter().map(|v| c * v).collect();
            let b = ridge_fit(&x, &y, 0.8).unwrap().coefficients;
            let cb: Vec<f64> = b.iter().map(|v| c * v).collect();
            homogeneous &= rel_close(&ridge_fit(&x, &cy, 0.8).unwrap().coefficients, &cb, 1e-12);
            let xty = x.tr_mul_vec(&y);
            let cxty: Vec<f64> = xty.iter().map(|v| c * v).collect();
            let e = enet_from_correlations(&xty, 0.7, 0.4).unwrap().coefficients;
            let ce: Vec<f64> = e.iter().map(|v| c * v).collect();
            homogeneous &= rel_close(&enet_from_correlations(&cxty, c * 0.7, 0.4).unwrap().coefficients, &ce, 1e-12);
        }
        for lambda in [1e-3, 0.5, 40.0] {
            primal_dual &= rel_close(&ridge_primal(&x, &y, lambda).unwrap(), &ridge_dual(&x, &y, lambda).unwrap(), 1e-10);
        }
    }

    let mut normalised = true;
    for seed in 0..200u64 {
        let mut r = RngStream::new(1011, seed);
        let m = 1 + (seed as usize % 40);
        let x: DesignMatrix = gen_design(12, m, &mut r).unwrap();
        let y: Vec<f64> = (0..12).map(|_| 5.0 * r.standard_normal()).collect();
        let lambda = 0.1 * (seed % 97) as f64;
        let d = spike_posterior(&y, &x, lambda, seed % 2 == 0).unwrap();
        normalised &= (d.p.iter().sum::<f64>() - 1.0).abs() <= 1e-10;
    }

    let mut cfg = SweepConfig::new(40, 60, 4, 1.0, vec![0.3, 1.0, 3.0], 8, Family::ALL.to_vec(), 31337);
    cfg.tuning_mode = TuningMode::Oracle;
    let dir = tempfile::tempdir().unwrap();
    let a = sweep_outputs(&cfg, 1, dir.path(), "a");
    let b = sweep_outputs(&cfg, 1, dir.path(), "b");
    let c = sweep_outputs(&cfg, 4, dir.path(), "c");
    let bytes = a == b && a == c;

    report(
        10,
        homogeneous && primal_dual && normalised && bytes,
        format!("homogeneity: {homogeneous}, primal/dual: {primal_dual}, normalization: {normalised}, byte-identical outputs: {bytes}"),
    );
}
