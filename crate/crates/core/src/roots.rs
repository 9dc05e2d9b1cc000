//! Bracketing bisection for monotone scalar residuals.

use crate::error::{Error, Result};

/// Stopping rule for [`bisect`]: stop once `|f(x)| <= f_tol` or the
/// bracket is narrower than `x_tol`, whichever comes first.
#[derive(Debug, Clone, Copy)]
pub struct Termination {
    pub f_tol: f64,
    pub x_tol: f64,
    pub max_iter: usize,
}

impl Termination {
    pub fn residual(f_tol: f64) -> Self {
        Termination {
            f_tol,
            x_tol: 0.0,
            max_iter: 2000,
        }
    }

    pub fn width(x_tol: f64) -> Self {
        Termination {
            f_tol: 0.0,
            x_tol,
            max_iter: 2000,
        }
    }
}

/// Bisection on `[a, b]`; `f(a)` and `f(b)` must have opposite signs
/// (infinite values count as signed). Returns the midpoint of the final
/// bracket, or the exact point if a zero is hit.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, stop: Termination) -> Result<f64> {
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::RootNotFound(format!(
            "residual is NaN at the bracket [{lo}, {hi}]"
        )));
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::RootNotFound(format!(
            "no sign change on [{lo}, {hi}] (f = {f_lo}, {f_hi})"
        )));
    }
    for _ in 0..stop.max_iter {
        let mid = lo + 0.5 * (hi - lo);
        let f_mid = f(mid);
        if f_mid.is_nan() {
            return Err(Error::RootNotFound(format!("residual is NaN at {mid}")));
        }
        if f_mid.abs() <= stop.f_tol || f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if hi - lo <= stop.x_tol || hi <= next_up(lo) {
            return Ok(lo + 0.5 * (hi - lo));
        }
    }
    Ok(lo + 0.5 * (hi - lo))
}

fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    if x > 0.0 {
        f64::from_bits(bits + 1)
    } else {
        f64::from_bits(bits - 1)
    }
}
