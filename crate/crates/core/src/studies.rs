//! Numerical studies built on the solvers: convergence against a fine
//! reference run, final size versus step, and the NSFD/trapezoidal
//! comparison.

use crate::dq::{property_violations, trapz_dq_run, ViolationReport};
use crate::error::{Error, Result};
use crate::indicators::{final_size_from_relation, r0_continuous};
use crate::model::EpidemicModel;
use crate::nsfd::{nsfd_run, SolverConfig};
use crate::trajectory::Trajectory;

/// Sup-norm errors over the coarse mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub abs_s: f64,
    pub abs_phi: f64,
    /// `max_n |S_n − S_ref(t_n)| / |S_ref(t_n)|`
    pub rel_s: f64,
    pub rel_phi: f64,
}

/// Mesh ratio `h / h_ref`, required to be an integer ≥ 2.
fn nesting_ratio(h: f64, h_ref: f64) -> Result<usize> {
    let ratio = h / h_ref;
    let k = ratio.round();
    if !(h_ref > 0.0 && k >= 2.0 && (ratio - k).abs() <= 1e-9 * k) {
        return Err(Error::Config(format!(
            "meshes are not nested: h = {h} is not an integer multiple (≥ 2) of h_ref = {h_ref}"
        )));
    }
    Ok(k as usize)
}

/// Compares `coarse` against `reference` at the shared mesh points.
pub fn errors_against(reference: &Trajectory, coarse: &Trajectory) -> Result<ErrorNorms> {
    let k = nesting_ratio(coarse.h(), reference.h())?;
    let needed = (coarse.len() - 1) * k;
    if needed >= reference.len() {
        return Err(Error::Config(format!(
            "reference run ends at t = {} before the coarse run at t = {}",
            reference.time(reference.len() - 1),
            coarse.time(coarse.len() - 1)
        )));
    }
    let mut e = ErrorNorms {
        abs_s: 0.0,
        abs_phi: 0.0,
        rel_s: 0.0,
        rel_phi: 0.0,
    };
    for n in 0..coarse.len() {
        let (rs, rp) = (reference.s()[n * k], reference.phi()[n * k]);
        let ds = (coarse.s()[n] - rs).abs();
        let dp = (coarse.phi()[n] - rp).abs();
        e.abs_s = e.abs_s.max(ds);
        e.abs_phi = e.abs_phi.max(dp);
        e.rel_s = e.rel_s.max(relative(ds, rs));
        e.rel_phi = e.rel_phi.max(relative(dp, rp));
    }
    Ok(e)
}

fn relative(diff: f64, reference: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else {
        diff / reference.abs()
    }
}

fn fixed_horizon(base: &SolverConfig, h: f64, t_end: f64) -> SolverConfig {
    SolverConfig {
        h,
        t_max: t_end,
        stop_at_steady_state: false,
        ..base.clone()
    }
}

/// Errors of the NSFD run with step `h` against a reference run with step
/// `h_ref` on `[0, t_end]`.
pub fn error_vs_reference(model: &EpidemicModel, h: f64, h_ref: f64, t_end: f64) -> Result<ErrorNorms> {
    nesting_ratio(h, h_ref)?;
    let base = SolverConfig::new(h_ref, t_end);
    let reference = nsfd_run(model, &fixed_horizon(&base, h_ref, t_end))?;
    let coarse = nsfd_run(model, &fixed_horizon(&base, h, t_end))?;
    errors_against(&reference, &coarse)
}

/// Experimental orders `log(e_i/e_{i+1}) / log(h_i/h_{i+1})` for pairs
/// `(h, error)` with strictly decreasing `h`. `None` where an error is zero.
pub fn experimental_order(errors: &[(f64, f64)]) -> Result<Vec<Option<f64>>> {
    if errors.len() < 2 {
        return Err(Error::Config("at least two (h, error) pairs are needed".into()));
    }
    errors
        .windows(2)
        .map(|w| {
            let ((h0, e0), (h1, e1)) = (w[0], w[1]);
            if !(h1 > 0.0 && h1 < h0) {
                return Err(Error::Config(format!(
                    "step sizes must strictly decrease: {h0} then {h1}"
                )));
            }
            if e0 <= 0.0 || e1 <= 0.0 {
                return Ok(None);
            }
            Ok(Some((e0 / e1).ln() / (h0 / h1).ln()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub errors: ErrorNorms,
    /// Order against the previous (larger) step, from absolute errors.
    pub order_s: Option<f64>,
    pub order_phi: Option<f64>,
}

/// Runs the reference once and every step in `h_list` (strictly
/// decreasing) against it on `[0, t_end]`.
pub fn convergence_study(
    model: &EpidemicModel,
    h_list: &[f64],
    h_ref: f64,
    base: &SolverConfig,
) -> Result<Vec<ConvergenceRow>> {
    if h_list.is_empty() {
        return Err(Error::Config("empty step list".into()));
    }
    for &h in h_list {
        nesting_ratio(h, h_ref)?;
    }
    let t_end = base.t_max;
    let reference = nsfd_run(model, &fixed_horizon(base, h_ref, t_end))?;
    let mut rows = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let coarse = nsfd_run(model, &fixed_horizon(base, h, t_end))?;
        rows.push(ConvergenceRow {
            h,
            errors: errors_against(&reference, &coarse)?,
            order_s: None,
            order_phi: None,
        });
    }
    if rows.len() >= 2 {
        let s: Vec<_> = rows.iter().map(|r| (r.h, r.errors.abs_s)).collect();
        let p: Vec<_> = rows.iter().map(|r| (r.h, r.errors.abs_phi)).collect();
        let (os, op) = (experimental_order(&s)?, experimental_order(&p)?);
        for (i, row) in rows.iter_mut().enumerate().skip(1) {
            row.order_s = os[i - 1];
            row.order_phi = op[i - 1];
        }
    }
    Ok(rows)
}

/// How many times the horizon is doubled when a run has not settled.
pub const MAX_HORIZON_DOUBLINGS: u32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct FinalSizeRow {
    pub h: f64,
    /// Last computed `S`; equals `S∞(h)` when `complete`.
    pub s_inf_h: f64,
    pub t_end: f64,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinalSizeTable {
    pub rows: Vec<FinalSizeRow>,
    /// Root of the continuous final-size relation.
    pub s_inf_relation: f64,
}

/// `S∞(h)` for each `h`, in the given order. A run that has not reached
/// steady state by `config.t_max` is repeated with a doubled horizon up to
/// [`MAX_HORIZON_DOUBLINGS`] times, then reported as incomplete.
pub fn final_size_sweep(model: &EpidemicModel, h_list: &[f64], config: &SolverConfig) -> Result<FinalSizeTable> {
    let mut rows = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let mut cfg = SolverConfig {
            h,
            stop_at_steady_state: true,
            ..config.clone()
        };
        let mut doublings = 0;
        let row = loop {
            let t = nsfd_run(model, &cfg)?;
            if let Some(s_inf) = t.s_inf_h() {
                break FinalSizeRow {
                    h,
                    s_inf_h: s_inf,
                    t_end: t.time(t.len() - 1),
                    complete: true,
                };
            }
            if doublings == MAX_HORIZON_DOUBLINGS {
                break FinalSizeRow {
                    h,
                    s_inf_h: t.last_s(),
                    t_end: t.time(t.len() - 1),
                    complete: false,
                };
            }
            doublings += 1;
            cfg.t_max *= 2.0;
        };
        rows.push(row);
    }
    let r0 = r0_continuous(model, config.tail_tol)?;
    let s_inf_relation = final_size_from_relation(r0, model.population, model.s0, config.tail_tol)?;
    Ok(FinalSizeTable { rows, s_inf_relation })
}

#[derive(Debug, Clone)]
pub struct SchemeComparison {
    pub nsfd: Trajectory,
    /// Full trajectory, or the part computed before a breakdown.
    pub trapz: Trajectory,
    pub nsfd_violations: ViolationReport,
    pub trapz_violations: ViolationReport,
    /// Step index at which the trapezoidal iteration failed.
    pub trapz_breakdown: Option<usize>,
}

/// Runs both schemes on the same mesh over `[0, config.t_max]`.
pub fn scheme_comparison(model: &EpidemicModel, h: f64, config: &SolverConfig) -> Result<SchemeComparison> {
    let cfg = fixed_horizon(config, h, config.t_max);
    let nsfd = nsfd_run(model, &cfg)?;
    let (trapz, trapz_breakdown) = match trapz_dq_run(model, &cfg) {
        Ok(t) => (t, None),
        Err(Error::FixedPoint { n, partial, .. }) => (*partial, Some(n)),
        Err(e) => return Err(e),
    };
    Ok(SchemeComparison {
        nsfd_violations: property_violations(&nsfd),
        trapz_violations: property_violations(&trapz),
        nsfd,
        trapz,
        trapz_breakdown,
    })
}
