//! Non-standard finite-difference scheme on a uniform mesh `t_n = n·h`:
//!
//! ```text
//! S_{n+1} = S_n − h·β·S_{n+1}·φ_n
//! φ_{n+1} = φ0(t_{n+1}) + h·β·Σ_{j=0}^{n} A(t_{n+1−j})·S_{j+1}·φ_j
//! ```
//!
//! The implicit susceptible update is solved in closed form,
//! `S_{n+1} = S_n / (1 + h·β·φ_n)`, so every step is explicit and the
//! scheme is positive and monotone for any `h > 0`.

use crate::error::{Error, Result};
use crate::fastconv;
use crate::kernel::{check_step, check_tol, DEFAULT_TOL};
use crate::model::EpidemicModel;
use crate::sum::CompensatedSum;
use crate::trajectory::{Scheme, Trajectory};

/// How the history convolution of each step is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convolution {
    /// Compensated summation over the full history, `O(M²)` per run.
    #[default]
    Direct,
    /// Divide-and-conquer FFT evaluation, `O(M log² M)` per run. Keeps the
    /// full history; agrees with `Direct` up to FFT rounding, which is not
    /// bit-reproducible across platforms.
    Fft,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub h: f64,
    pub t_max: f64,
    /// Steady state requires `φ_n < eps_phi·N` ...
    pub eps_phi: f64,
    /// ... and `|S_n − S_{n−1}| < eps_s·max(S_n, 1)` ...
    pub eps_s: f64,
    /// ... for this many consecutive steps.
    pub window: usize,
    /// Truncation tolerance for kernel tails and series.
    pub tail_tol: f64,
    /// Upper bound on the number of mesh steps.
    pub max_steps: usize,
    /// Stop the run as soon as steady state is detected.
    pub stop_at_steady_state: bool,
    /// Only lags `n + 1 − j ≤ cutoff` enter the convolution. Off by default.
    pub history_cutoff: Option<usize>,
    pub convolution: Convolution,
}

impl SolverConfig {
    pub const DEFAULT_EPS: f64 = 1e-12;
    pub const DEFAULT_WINDOW: usize = 10;
    pub const DEFAULT_MAX_STEPS: usize = 1 << 25;

    pub fn new(h: f64, t_max: f64) -> Self {
        SolverConfig {
            h,
            t_max,
            eps_phi: Self::DEFAULT_EPS,
            eps_s: Self::DEFAULT_EPS,
            window: Self::DEFAULT_WINDOW,
            tail_tol: DEFAULT_TOL,
            max_steps: Self::DEFAULT_MAX_STEPS,
            stop_at_steady_state: true,
            history_cutoff: None,
            convolution: Convolution::Direct,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_step(self.h)?;
        if !(self.t_max.is_finite() && self.t_max >= self.h) {
            return Err(Error::Config(format!(
                "t_max = {} must be finite and at least h = {}",
                self.t_max, self.h
            )));
        }
        for (name, v) in [("eps_phi", self.eps_phi), ("eps_s", self.eps_s)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.window == 0 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        check_tol(self.tail_tol)?;
        if self.history_cutoff == Some(0) {
            return Err(Error::Config("history cutoff must be at least 1".into()));
        }
        if self.history_cutoff.is_some() && self.convolution == Convolution::Fft {
            return Err(Error::Config(
                "history cutoff is only supported with direct convolution".into(),
            ));
        }
        let steps = self.steps();
        if steps > self.max_steps {
            return Err(Error::MemoryGuard {
                steps,
                cap: self.max_steps,
            });
        }
        Ok(())
    }

    /// Number of steps `M` so that `t_M` is the last mesh point not beyond
    /// `t_max` (up to rounding of the ratio).
    pub fn steps(&self) -> usize {
        let ratio = self.t_max / self.h;
        let nearest = ratio.round();
        if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest as usize
        } else {
            ratio.floor() as usize
        }
    }
}

/// Incremental steady-state test shared by every scheme.
#[derive(Debug, Clone)]
pub(crate) struct SteadyStateDetector {
    phi_threshold: f64,
    eps_s: f64,
    window: usize,
    streak: usize,
}

impl SteadyStateDetector {
    pub(crate) fn new(config: &SolverConfig, population: f64) -> Self {
        SteadyStateDetector {
            phi_threshold: config.eps_phi * population,
            eps_s: config.eps_s,
            window: config.window,
            streak: 0,
        }
    }

    /// Feeds mesh point `n ≥ 1`; true once the window is complete.
    pub(crate) fn observe(&mut self, s_prev: f64, s: f64, phi: f64) -> bool {
        let quiet = phi < self.phi_threshold && (s - s_prev).abs() < self.eps_s * s.max(1.0);
        self.streak = if quiet { self.streak + 1 } else { 0 };
        self.streak >= self.window
    }
}

/// One step of the scheme from the committed history `S_0..S_n`,
/// `φ_0..φ_n`; returns `(S_{n+1}, φ_{n+1})`.
pub fn nsfd_step(s_history: &[f64], phi_history: &[f64], model: &EpidemicModel, h: f64) -> Result<(f64, f64)> {
    check_step(h)?;
    if s_history.is_empty() || s_history.len() != phi_history.len() {
        return Err(Error::Precondition(
            "S and phi histories must be non-empty and of equal length".into(),
        ));
    }
    let n = s_history.len() - 1;
    if !(s_history[n] >= 0.0) {
        return Err(Error::Precondition(format!(
            "S_n = {} must be non-negative",
            s_history[n]
        )));
    }
    let hb = h * model.beta;
    let s_next = s_history[n] / (1.0 + hb * phi_history[n]);
    let mut acc = CompensatedSum::new();
    for j in 0..=n {
        let s_after = if j < n { s_history[j + 1] } else { s_next };
        let lag = (n + 1 - j) as f64 * h;
        acc.add(model.kernel.value(lag) * (s_after * phi_history[j]));
    }
    let t_next = (n + 1) as f64 * h;
    Ok((s_next, model.phi0_at(t_next) + hb * acc.value()))
}

/// Runs the scheme from `S_0 = model.s0`, `φ_0 = φ0(0)` to `t_max`, or
/// until steady state when `config.stop_at_steady_state` is set.
pub fn nsfd_run(model: &EpidemicModel, config: &SolverConfig) -> Result<Trajectory> {
    config.validate()?;
    let steps = config.steps();
    let (s, phi, s_inf) = match config.convolution {
        Convolution::Direct => run_direct(model, config, steps),
        Convolution::Fft => fastconv::run(model, config, steps),
    };
    Ok(Trajectory::from_parts(Scheme::Nsfd, config.h, model.population, s, phi)?.with_steady_state(s_inf))
}

/// `A(t_k)` for `k = 0..=steps`.
pub(crate) fn kernel_samples(model: &EpidemicModel, h: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| model.kernel.value(k as f64 * h)).collect()
}

fn run_direct(model: &EpidemicModel, config: &SolverConfig, steps: usize) -> (Vec<f64>, Vec<f64>, Option<f64>) {
    let h = config.h;
    let hb = h * model.beta;
    let a = kernel_samples(model, h, steps);
    let mut s = Vec::with_capacity(steps + 1);
    let mut phi = Vec::with_capacity(steps + 1);
    // w_j = S_{j+1}·φ_j
    let mut w = Vec::with_capacity(steps);
    s.push(model.s0);
    phi.push(model.phi0_at(0.0));
    let mut detector = SteadyStateDetector::new(config, model.population);
    let mut s_inf = None;

    for n in 0..steps {
        let s_next = s[n] / (1.0 + hb * phi[n]);
        w.push(s_next * phi[n]);
        let first = match config.history_cutoff {
            Some(cutoff) => (n + 1).saturating_sub(cutoff),
            None => 0,
        };
        let mut acc = CompensatedSum::new();
        for (j, wj) in w.iter().enumerate().skip(first) {
            acc.add(a[n + 1 - j] * wj);
        }
        let t_next = (n + 1) as f64 * h;
        let phi_next = model.phi0_at(t_next) + hb * acc.value();
        s.push(s_next);
        phi.push(phi_next);
        if detector.observe(s[n], s_next, phi_next) {
            s_inf = Some(s_next);
            if config.stop_at_steady_state {
                break;
            }
        }
    }
    (s, phi, s_inf)
}

/// `S∞(h)` if the last `window` steps of the trajectory satisfy the
/// steady-state test, otherwise `None`.
pub fn steady_state(trajectory: &Trajectory, config: &SolverConfig) -> Option<f64> {
    let s = trajectory.s();
    let phi = trajectory.phi();
    let mut detector = SteadyStateDetector::new(config, trajectory.population());
    let mut reached = false;
    for n in 1..s.len() {
        reached = detector.observe(s[n - 1], s[n], phi[n]);
    }
    reached.then(|| trajectory.last_s())
}
