//! Normal-distribution helpers built on `libm::erfc`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Scaled complementary error function `exp(x²)·erfc(x)`.
///
/// Direct evaluation for `x < 3`; above that a continued fraction that
/// stays finite where `erfc` underflows.
pub fn erfcx(x: f64) -> f64 {
    if x < 3.0 {
        return (x * x).exp() * libm::erfc(x);
    }
    // erfc(x) = exp(-x²)/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let mut frac = x;
    for k in (1..=60).rev() {
        frac = x + (k as f64 / 2.0) / frac;
    }
    1.0 / (PI.sqrt() * frac)
}

/// Upper tail `P(Z > z)` of the standard normal distribution.
pub fn normal_upper_tail(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}
