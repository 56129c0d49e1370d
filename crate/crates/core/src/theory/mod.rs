//! Closed-form risk formulas, the soft-thresholding risk functions and
//! Gaussian tail utilities.

pub mod formulas;
pub mod normal;
pub mod quadrature;
pub mod soft_risk;

pub use formulas::{
    enet_second_order_bounds, gaussian_tail_bounds, high_snr_risk, minimax_first_order,
    minimax_first_order_auto, ridge_second_order_risk, risk_curve, zero_estimator_risk,
    EnetBounds, FormulaId, FormulaValue, RiskCurve,
};
pub use soft_risk::{
    chi2_mean_rule, mixture_soft_risk, soft_risk, soft_threshold, worst_pair_risk,
    SoftRiskParams, MIXTURE_TAIL_MASS,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ParamSpace, RegimeLabel, SnrRegime};

    #[test]
    fn soft_risk_nondecreasing_in_u() {
        for chi1 in [0.5, 1.0, 2.0, 3.0] {
            for chi2 in [0.0, 0.5, 4.0] {
                let p = SoftRiskParams::new(chi1, chi2, 1.0).unwrap();
                let mut prev = soft_risk(0.0, &p);
                for i in 1..=50 {
                    let r = soft_risk(0.1 * i as f64, &p);
                    assert!(r >= prev, "chi1 {chi1}, chi2 {chi2}, u {}", 0.1 * i as f64);
                    prev = r;
                }
            }
        }
    }

    #[test]
    fn worst_pair_dominates_circle() {
        for (chi1, chi2) in [(1.0, 0.0), (2.0, 0.5), (0.5, 3.0)] {
            let p = SoftRiskParams::new(chi1, chi2, 1.0).unwrap();
            for c in [0.3, 1.0, 2.5, 6.0] {
                let worst = worst_pair_risk(c, &p).unwrap();
                for i in 0..32 {
                    let t = 2.0 * std::f64::consts::PI * i as f64 / 32.0;
                    let pair = soft_risk(c * t.cos(), &p) + soft_risk(c * t.sin(), &p);
                    assert!(pair <= worst + 1e-10, "c {c}, angle {t}");
                }
            }
        }
    }

    #[test]
    fn ridge_below_first_order_low() {
        let low = SnrRegime {
            rho: 0.0,
            label: RegimeLabel::Low,
        };
        for (k, tau, p) in [(10, 0.5, 1000), (1, 0.01, 5), (50, 0.4, 500)] {
            let s = ParamSpace::new(k, tau, 1.0).unwrap();
            let ridge = ridge_second_order_risk(p, &s).unwrap();
            assert!(ridge.valid);
            assert!(ridge.value < minimax_first_order(p, &s, &low).unwrap());
        }
    }

    #[test]
    fn enet_correction_beats_ridge_correction() {
        // (2/sqrt(2 pi)) (k/p) mu^{-1} e^{mu^2} > k mu^2 / p  <=>  e^{mu^2} > sqrt(2 pi) mu^3 / 2
        let (k, p) = (10usize, 1000usize);
        for i in 1..=100 {
            let mu = 0.05 * i as f64;
            assert!((mu * mu).exp() > (2.0 * std::f64::consts::PI).sqrt() * mu.powi(3) / 2.0);
            let s = ParamSpace::new(k, mu, 1.0).unwrap();
            let enet = enet_second_order_bounds(p, &s).unwrap().upper.value;
            let ridge = ridge_second_order_risk(p, &s).unwrap().value;
            assert!(enet < ridge, "mu = {mu}");
        }
    }

    fn standard_grid() -> Vec<(f64, SoftRiskParams)> {
        let mut grid = Vec::new();
        for u in [0.0, 0.7, 2.0, 5.0] {
            for (chi1, chi2) in [(0.0, 0.0), (1.0, 0.0), (2.0, 1.0), (0.5, 10.0)] {
                grid.push((u, SoftRiskParams::new(chi1, chi2, 1.0).unwrap()));
            }
        }
        grid
    }

    #[test]
    fn mixture_quadrature_self_converges() {
        for n in [3, 20, 500] {
            for (u, p) in standard_grid() {
                let a = mixture_soft_risk(u, &p, n, 64).unwrap();
                let b = mixture_soft_risk(u, &p, n, 128).unwrap();
                assert!((a - b).abs() <= 1e-8, "n {n}, u {u}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn mixture_concentrates_for_large_n() {
        for (u, p) in standard_grid() {
            let g = mixture_soft_risk(u, &p, 10_000, 64).unwrap();
            assert!((g - soft_risk(u, &p)).abs() <= 1e-2, "u {u}");
        }
    }

    #[test]
    fn mixture_matches_monte_carlo() {
        use crate::model::RngStream;
        let n = 4;
        let p = SoftRiskParams::new(1.0, 0.5, 1.0).unwrap();
        let u = 1.5;
        let mut rng = RngStream::new(2024, 0);
        let draws = 400_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..draws {
            let v: f64 = (0..n).map(|_| rng.standard_normal().powi(2)).sum::<f64>() / n as f64;
            let e = v.sqrt() * rng.standard_normal();
            let d = soft_threshold(u + e, 1.0) / 1.5 - u;
            sum += d * d;
            sq += d.powi(4);
        }
        let mean = sum / draws as f64;
        let se = ((sq / draws as f64 - mean * mean) / draws as f64).sqrt();
        let g = mixture_soft_risk(u, &p, n, 64).unwrap();
        assert!((g - mean).abs() <= 4.0 * se, "g {g}, mc {mean} +- {se}");
    }
}
