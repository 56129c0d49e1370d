//! Standard normal density, distribution and truncated moments.
//!
//! `Phi` is computed from the complementary error function in `libm`
//! (a port of the FreeBSD msun rational approximations, relative error below
//! one ulp of `erfc`). Tail quantities for large arguments go through the
//! Laplace continued fraction for the Mills ratio so that small partial
//! moments are never formed as differences of nearly equal numbers.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Beyond this argument partial moments switch to the continued fraction.
const TAIL_SWITCH: f64 = 3.0;
const CF_TERMS: usize = 400;

pub fn pdf(x: f64) -> f64 {
    libm::exp(-0.5 * x * x) / (2.0 * PI).sqrt()
}

pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Phi(x)`, accurate in relative terms for large x.
pub fn sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Tail continued-fraction pieces at `t > 0`:
/// `c1 = 1/(t + 2/(t + 3/(t + ...)))` and `c2 = 2/(t + 3/(t + ...))`, so that
/// the Mills ratio is `1/(t + c1)`.
fn laplace_tails(t: f64) -> (f64, f64) {
    let mut tail = 0.0;
    for j in (3..=CF_TERMS).rev() {
        tail = j as f64 / (t + tail);
    }
    let c2 = 2.0 / (t + tail);
    let c1 = 1.0 / (t + c2);
    (c1, c2)
}

/// `(1 - Phi(t)) / phi(t)` for t >= 0.
pub fn mills_ratio(t: f64) -> f64 {
    if t < TAIL_SWITCH {
        sf(t) / pdf(t)
    } else {
        let (c1, _) = laplace_tails(t);
        1.0 / (t + c1)
    }
}

/// `E[(Z + d)_+]` for standard normal Z.
pub fn partial_moment1(d: f64) -> f64 {
    if d >= -TAIL_SWITCH {
        pdf(d) + d * cdf(d)
    } else {
        let t = -d;
        let (c1, _) = laplace_tails(t);
        pdf(t) * c1 / (t + c1)
    }
}

/// `E[(Z + d)_+^2]` for standard normal Z.
pub fn partial_moment2(d: f64) -> f64 {
    if d >= -TAIL_SWITCH {
        (1.0 + d * d) * cdf(d) + d * pdf(d)
    } else {
        let t = -d;
        let (c1, c2) = laplace_tails(t);
        pdf(t) / (t + c1) * c2 / (t + c2)
    }
}
