//! Classical trapezoidal direct-quadrature (DQ) scheme, kept as the
//! comparison method that does *not* preserve positivity or monotonicity.
//!
//! ```text
//! S_{n+1} = S_n − (hβ/2)·(S_n·φ_n + S_{n+1}·φ_{n+1})
//! φ_{n+1} = φ0(t_{n+1}) + β·Σ_{j=0}^{n+1} w_{n+1,j}·A(t_{n+1} − t_j)·S_j·φ_j
//! ```
//!
//! with trapezoidal weights `h/2` at both ends and `h` inside. The pair
//! `(S_{n+1}, φ_{n+1})` is found by a Gauss–Seidel fixed-point iteration
//! started from `(S_n, φ_n)`: each sweep solves the φ-equation for
//! `φ_{n+1}` with `S_{n+1}` frozen, then the S-equation for `S_{n+1}`.

use crate::error::{Error, Result};
use crate::model::EpidemicModel;
use crate::nsfd::{kernel_samples, SolverConfig, SteadyStateDetector};
use crate::sum::CompensatedSum;
use crate::trajectory::{Scheme, Trajectory};

pub const FIXED_POINT_TOL: f64 = 1e-12;
pub const FIXED_POINT_MAX_ITER: usize = 100;

/// Runs the trapezoidal DQ scheme. On a failed step the error carries the
/// trajectory up to the last committed step.
pub fn trapz_dq_run(model: &EpidemicModel, config: &SolverConfig) -> Result<Trajectory> {
    config.validate()?;
    let h = config.h;
    let beta = model.beta;
    let steps = config.steps();
    let a = kernel_samples(model, h, steps);
    let mut s = Vec::with_capacity(steps + 1);
    let mut phi = Vec::with_capacity(steps + 1);
    // y_j = S_j·φ_j
    let mut y = Vec::with_capacity(steps + 1);
    s.push(model.s0);
    phi.push(model.phi0_at(0.0));
    y.push(s[0] * phi[0]);
    let mut detector = SteadyStateDetector::new(config, model.population);
    let mut s_inf = None;

    let half = 0.5 * h;
    // Coefficient of S_{n+1}·φ_{n+1} in both equations.
    let c_phi = beta * half * a[0];
    let c_s = half * beta;

    for n in 0..steps {
        let mut acc = CompensatedSum::new();
        acc.add(half * a[n + 1] * y[0]);
        for j in 1..=n {
            acc.add(h * a[n + 1 - j] * y[j]);
        }
        let forcing = model.phi0_at((n + 1) as f64 * h) + beta * acc.value();
        let explicit_s = s[n] - c_s * y[n];

        match fixed_point(forcing, explicit_s, c_phi, c_s, s[n], phi[n]) {
            Some((s_next, phi_next)) => {
                s.push(s_next);
                phi.push(phi_next);
                y.push(s_next * phi_next);
            }
            None => {
                let partial = Trajectory::from_parts(Scheme::TrapezoidalDq, h, model.population, s, phi)?;
                return Err(Error::FixedPoint {
                    n,
                    h,
                    partial: Box::new(partial),
                });
            }
        }
        if detector.observe(s[n], s[n + 1], phi[n + 1]) {
            s_inf = Some(s[n + 1]);
            if config.stop_at_steady_state {
                break;
            }
        }
    }
    Ok(Trajectory::from_parts(Scheme::TrapezoidalDq, h, model.population, s, phi)?.with_steady_state(s_inf))
}

/// Solves `p = F + c_phi·s·p`, `s = G − c_s·s·p` from `(s, p)`.
fn fixed_point(forcing: f64, explicit_s: f64, c_phi: f64, c_s: f64, s0: f64, p0: f64) -> Option<(f64, f64)> {
    let (mut s, mut p) = (s0, p0);
    for _ in 0..FIXED_POINT_MAX_ITER {
        let p_new = forcing / (1.0 - c_phi * s);
        let s_new = explicit_s / (1.0 + c_s * p_new);
        if !(p_new.is_finite() && s_new.is_finite()) {
            return None;
        }
        let settled = (s_new - s).abs() <= FIXED_POINT_TOL * s_new.abs().max(1.0)
            && (p_new - p).abs() <= FIXED_POINT_TOL * p_new.abs().max(1.0);
        s = s_new;
        p = p_new;
        if settled {
            return Some((s, p));
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    NegativeS,
    NegativePhi,
    IncreasingS,
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    /// Mesh index; for `IncreasingS` the index `n` of the step `n → n + 1`.
    pub index: usize,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

/// Indices where `S_n < 0`, `φ_n < 0` or `S_{n+1} > S_n` by more than
/// `10⁻¹²·N`.
pub fn property_violations(trajectory: &Trajectory) -> ViolationReport {
    let slack = 1e-12 * trajectory.population();
    let s = trajectory.s();
    let phi = trajectory.phi();
    let mut violations = Vec::new();
    for n in 0..s.len() {
        if !(s[n].is_finite() && phi[n].is_finite()) {
            violations.push(Violation {
                index: n,
                kind: ViolationKind::NonFinite,
            });
            continue;
        }
        if s[n] < -slack {
            violations.push(Violation {
                index: n,
                kind: ViolationKind::NegativeS,
            });
        }
        if phi[n] < -slack {
            violations.push(Violation {
                index: n,
                kind: ViolationKind::NegativePhi,
            });
        }
        if n + 1 < s.len() && s[n + 1] > s[n] + slack {
            violations.push(Violation {
                index: n,
                kind: ViolationKind::IncreasingS,
            });
        }
    }
    ViolationReport { violations }
}
