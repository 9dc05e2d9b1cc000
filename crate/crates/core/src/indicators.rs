//! Epidemic indicators of the continuous model and of the NSFD scheme.
//!
//! | quantity | continuous | discrete (step `h`) |
//! |---|---|---|
//! | reproduction number | `R0 = βN∫A` | `R0(h) = hβN·Σ A(t_{n+1})` |
//! | growth rate `r` | `1 = βN∫A(s)e^{-rs}ds` | `1 = hβN·Σ A(t_{n+1})(1+rh)^{-(n+1)}` |
//! | final size | `log(S0/S∞) = R0(1 − S∞/N)` | `S∞(h) = S0 / Π(1 + hβφ_n)` |
//!
//! `R0(h) = R0 − βN·τ(h)` where `τ(h)` is the right-rectangle quadrature
//! error of `∫A`. All scalar roots are found by bracketing bisection.

use crate::error::{Error, Result};
use crate::kernel::{check_step, check_tol, Kernel, DEFAULT_TOL};
use crate::model::EpidemicModel;
use crate::roots::{bisect, Termination};
use crate::sum::{compensated_sum, CompensatedSum};
use crate::trajectory::Trajectory;

/// Basic reproduction number `βN·∫_0^∞ A`.
pub fn r0_continuous(model: &EpidemicModel, tol: f64) -> Result<f64> {
    Ok(model.beta * model.population * model.kernel.integral_tail(0.0, tol)?)
}

/// Discrete reproduction number `hβN·Σ_{n≥0} A(t_{n+1})`.
pub fn r0_discrete(model: &EpidemicModel, h: f64, tol: f64) -> Result<f64> {
    Ok(model.beta * model.population * model.kernel.discrete_series(h, tol)?)
}

/// Quadrature error `τ(h) = ∫_0^∞ A − h·Σ A(t_{n+1})`.
pub fn tau(kernel: &Kernel, h: f64, tol: f64) -> Result<f64> {
    Ok(kernel.integral_tail(0.0, tol)? - kernel.discrete_series(h, tol)?)
}

/// `g(r) = βN·∫A(s)e^{-rs}ds − 1`; `+∞` where the transform diverges.
pub fn invasion_residual(model: &EpidemicModel, r: f64, tol: f64) -> Result<f64> {
    Ok(model.beta * model.population * model.kernel.laplace(r, tol)? - 1.0)
}

/// `g_h(r) = hβN·Σ A(t_{n+1})(1+rh)^{-(n+1)} − 1` for `r > −1/h`.
pub fn invasion_residual_discrete(model: &EpidemicModel, h: f64, r: f64, tol: f64) -> Result<f64> {
    let scale = model.beta * model.population;
    Ok(scale * model.kernel.discrete_laplace(h, r, series_tol(tol, scale))? - 1.0)
}

// Series truncation tight enough not to dominate the residual tolerance.
fn series_tol(tol: f64, scale: f64) -> f64 {
    tol.min(DEFAULT_TOL) / scale.max(1.0)
}

/// Early exponential growth rate of the continuous model.
pub fn growth_rate_continuous(model: &EpidemicModel, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    let mut failure = None;
    let mut g = |r: f64| match invasion_residual(model, r, tol) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let r = find_decreasing_root(&mut g, f64::NEG_INFINITY, tol)?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r)
}

/// Early growth rate of the NSFD scheme at step `h`; lies in `(−1/h, ∞)`.
pub fn growth_rate_discrete(model: &EpidemicModel, h: f64, tol: f64) -> Result<f64> {
    check_step(h)?;
    check_tol(tol)?;
    let mut failure = None;
    let mut g = |r: f64| match invasion_residual_discrete(model, h, r, tol) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let r = find_decreasing_root(&mut g, -1.0 / h, tol)?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r)
}

/// Root of a residual that decreases in `r`, searched on `(lower, ∞)` by
/// doubling brackets away from zero.
fn find_decreasing_root<F: FnMut(f64) -> f64>(g: &mut F, lower: f64, tol: f64) -> Result<f64> {
    const MAX_EXPANSIONS: i32 = 64;
    let g0 = g(0.0);
    if g0.is_nan() {
        return Err(Error::RootNotFound("residual undefined at r = 0".into()));
    }
    if g0.abs() <= tol {
        return Ok(0.0);
    }
    let (a, b) = if g0 > 0.0 {
        let mut lo = 0.0;
        let mut hi = 1.0;
        let mut k = 0;
        while g(hi) > 0.0 {
            lo = hi;
            hi *= 2.0;
            k += 1;
            if k > MAX_EXPANSIONS {
                return Err(Error::RootNotFound("residual stays positive for large r".into()));
            }
        }
        (lo, hi)
    } else {
        let mut hi = 0.0;
        let mut k = 1;
        loop {
            let lo = if lower.is_finite() {
                lower * (1.0 - 0.5f64.powi(k))
            } else {
                -(2.0f64.powi(k - 1))
            };
            let v = g(lo);
            if v.is_nan() {
                return Err(Error::RootNotFound(format!("residual undefined at r = {lo}")));
            }
            if v > 0.0 {
                break (lo, hi);
            }
            hi = lo;
            k += 1;
            if k > MAX_EXPANSIONS {
                return Err(Error::RootNotFound(
                    "no sign change below r = 0 (subcritical model without a negative growth rate)".into(),
                ));
            }
        }
    };
    let r = bisect(&mut *g, a, b, Termination::residual(tol))?;
    let residual = g(r);
    // A bracket that collapsed onto a jump (e.g. from +∞ to a finite
    // value) has no root.
    if !(residual.abs() <= tol.max(1e-9)) {
        return Err(Error::RootNotFound(format!(
            "residual is discontinuous near r = {r} (g = {residual})"
        )));
    }
    Ok(r)
}

/// Unique `S∞ ∈ (0, S0]` with `log(S0/S∞) = R0·(1 − S∞/N)`, to absolute
/// accuracy `tol·N`.
///
/// With `S0 = N` there are no initial infectives and `S∞ = N` is returned;
/// with `S0 = 0`, `S∞ = 0`.
pub fn final_size_from_relation(r0: f64, population: f64, s0: f64, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    if !(r0.is_finite() && r0 > 0.0) {
        return Err(Error::invalid("R0", format!("must be positive, got {r0}")));
    }
    if !(population.is_finite() && population > 0.0) {
        return Err(Error::invalid("N", "N must be positive"));
    }
    if !(s0 >= 0.0 && s0 <= population) {
        return Err(Error::invalid("S0", format!("S0 = {s0} must lie in [0, N]")));
    }
    if s0 == 0.0 || s0 == population {
        return Ok(s0);
    }
    let f = |x: f64| (s0 / x).ln() - r0 * (1.0 - x / population);
    // f(S0·e^{-R0}/2) = ln 2 + R0·x/N > 0
    let lo = (0.5 * s0 * (-r0).exp()).max(f64::MIN_POSITIVE);
    bisect(f, lo, s0, Termination::width(tol * population))
}

fn require_steady_state(trajectory: &Trajectory) -> Result<f64> {
    trajectory
        .s_inf_h()
        .ok_or_else(|| Error::Precondition("trajectory did not reach steady state".into()))
}

/// Residual of the discrete final-size identity
/// `hβ·Σ_n φ_{n+1} = R0(h)·(1 − S∞(h)/N)`, relative to `max(1, R0(h))`.
pub fn discrete_final_size_check(trajectory: &Trajectory, model: &EpidemicModel, tol: f64) -> Result<f64> {
    let s_inf = require_steady_state(trajectory)?;
    let h = trajectory.h();
    let lhs = h * model.beta * compensated_sum(trajectory.phi()[1..].iter().copied());
    let r0h = r0_discrete(model, h, tol)?;
    let rhs = r0h * (1.0 - s_inf / model.population);
    Ok((lhs - rhs).abs() / r0h.max(1.0))
}

/// Spurious factor `U(h) = Σ log(1 + hβφ_n) / (hβ·Σ φ_n)`; exactly 1 for a
/// disease-free trajectory.
pub fn u_factor(trajectory: &Trajectory, model: &EpidemicModel) -> f64 {
    let hb = trajectory.h() * model.beta;
    let mut logs = CompensatedSum::new();
    let mut linear = CompensatedSum::new();
    for &p in trajectory.phi() {
        logs.add((hb * p).ln_1p());
        linear.add(hb * p);
    }
    if linear.value() == 0.0 {
        1.0
    } else {
        logs.value() / linear.value()
    }
}

/// Relative defect of `S∞(h)·Π_n (1 + hβφ_n) = S0`, evaluated in log form.
pub fn product_form_residual(trajectory: &Trajectory, model: &EpidemicModel) -> Result<f64> {
    let s_inf = require_steady_state(trajectory)?;
    let hb = trajectory.h() * model.beta;
    let phi = trajectory.phi();
    // S_M only depends on φ_0..φ_{M−1}.
    let log_product = compensated_sum(phi[..phi.len() - 1].iter().map(|&p| (hb * p).ln_1p()));
    let reconstructed = (s_inf.ln() + log_product).exp();
    Ok((reconstructed - model.s0).abs() / model.s0)
}

/// `log(S0/S∞(h)) − (N − S∞(h))·β·h·Σ A(t_{n+1})`, which vanishes as
/// `h → 0`.
pub fn final_size_consistency_gap(trajectory: &Trajectory, model: &EpidemicModel, tol: f64) -> Result<f64> {
    let s_inf = require_steady_state(trajectory)?;
    let series = model.kernel.discrete_series(trajectory.h(), tol)?;
    Ok((model.s0 / s_inf).ln() - (model.population - s_inf) * model.beta * series)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorReport {
    pub r0: f64,
    pub r0_h: f64,
    pub tau_h: f64,
    /// `None` when no growth rate exists (e.g. subcritical heavy tails).
    pub r_continuous: Option<f64>,
    pub r_discrete: Option<f64>,
    pub s_inf_relation: f64,
    pub s_inf_h: Option<f64>,
    pub u_h: Option<f64>,
    pub final_size_residual: Option<f64>,
}

/// Collects every indicator for `model` at step `h`. Trajectory-based
/// entries are filled when a steady-state trajectory is supplied.
pub fn indicator_report(
    model: &EpidemicModel,
    h: f64,
    tol: f64,
    trajectory: Option<&Trajectory>,
) -> Result<IndicatorReport> {
    let r0 = r0_continuous(model, tol)?;
    let r0_h = r0_discrete(model, h, tol)?;
    let tau_h = tau(&model.kernel, h, tol)?;
    let r_continuous = optional_root(growth_rate_continuous(model, tol))?;
    let r_discrete = optional_root(growth_rate_discrete(model, h, tol))?;
    let s_inf_relation = final_size_from_relation(r0, model.population, model.s0, tol)?;
    let steady = trajectory.filter(|t| t.steady_state_reached());
    let (s_inf_h, u_h, final_size_residual) = match steady {
        Some(t) => (
            t.s_inf_h(),
            Some(u_factor(t, model)),
            Some(discrete_final_size_check(t, model, tol)?),
        ),
        None => (None, None, None),
    };
    Ok(IndicatorReport {
        r0,
        r0_h,
        tau_h,
        r_continuous,
        r_discrete,
        s_inf_relation,
        s_inf_h,
        u_h,
        final_size_residual,
    })
}

fn optional_root(result: Result<f64>) -> Result<Option<f64>> {
    match result {
        Ok(r) => Ok(Some(r)),
        Err(Error::RootNotFound(_)) => Ok(None),
        Err(e) => Err(e),
    }
}
