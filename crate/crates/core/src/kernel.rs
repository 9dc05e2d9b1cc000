//! Mean-infectivity kernels `A(t)`.
//!
//! A [`Kernel`] is an immutable description of the infectivity profile of an
//! infected individual as a function of infection age. Besides point
//! evaluation it provides the integrals the solver and the indicators need:
//! the tail mass `∫_{t0}^∞ A`, the total variation `∫_0^∞ |A'|`, the
//! right-rectangle series `h·Σ_{n≥0} A(t_{n+1})` and (discrete or continuous)
//! Laplace-type transforms.
//!
//! Series are truncated with a dual rule: the current term must be below
//! `tol` *and* the remaining analytic tail mass must be below `tol`. For the
//! power-law family, whose tail mass decays too slowly for that rule to fire
//! within any reasonable number of terms, the remainder is instead closed
//! with an Euler–Maclaurin expansion once its first omitted term is below
//! `tol`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad;
use crate::special::{erfcx, normal_upper_tail};
use crate::sum::CompensatedSum;

/// Default absolute tolerance for tails and series.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Hard cap on the number of series terms before declaring divergence.
pub const DEFAULT_TERM_CAP: u64 = 100_000_000;

/// Piecewise-linear kernel on an ascending grid starting at `t = 0`,
/// extended by zero beyond the last grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl Table {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::invalid(
                "kernel.table",
                format!("{} grid points but {} values", grid.len(), values.len()),
            ));
        }
        if grid.len() < 2 {
            return Err(Error::invalid("kernel.table", "at least two grid points are required"));
        }
        if grid[0] != 0.0 {
            return Err(Error::invalid("kernel.table", "grid must start at t = 0"));
        }
        if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "kernel.table",
                "grid must be finite and strictly ascending",
            ));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("kernel.table", "values must be finite and non-negative"));
        }
        Ok(Table { grid, values })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn last_time(&self) -> f64 {
        *self.grid.last().expect("non-empty grid")
    }

    fn interp(&self, t: f64) -> f64 {
        let last = self.grid.len() - 1;
        if t > self.grid[last] {
            return 0.0;
        }
        if t == self.grid[last] {
            return self.values[last];
        }
        let i = self.grid.partition_point(|&g| g <= t) - 1;
        let (t0, t1) = (self.grid[i], self.grid[i + 1]);
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    // The trapezoidal rule on the table nodes is exact for the
    // piecewise-linear interpolant.
    fn integral_from(&self, t0: f64) -> f64 {
        if t0 >= self.last_time() {
            return 0.0;
        }
        let i = self.grid.partition_point(|&g| g <= t0) - 1;
        let mut acc = CompensatedSum::new();
        acc.add(0.5 * (self.grid[i + 1] - t0) * (self.interp(t0) + self.values[i + 1]));
        for k in (i + 1)..(self.grid.len() - 1) {
            acc.add(0.5 * (self.grid[k + 1] - self.grid[k]) * (self.values[k] + self.values[k + 1]));
        }
        acc.value()
    }

    fn total_variation(&self) -> f64 {
        let inner: f64 = self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        // The zero extension adds the final drop.
        inner + self.values[self.values.len() - 1]
    }

    fn max_from(&self, t: f64) -> f64 {
        if t > self.last_time() {
            return 0.0;
        }
        let i = self.grid.partition_point(|&g| g <= t);
        self.values[i..].iter().copied().fold(self.interp(t), f64::max)
    }

    fn laplace(&self, r: f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for k in 0..self.grid.len() - 1 {
            let (a, b) = (self.grid[k], self.grid[k + 1]);
            let (va, vb) = (self.values[k], self.values[k + 1]);
            let seg = |s: f64| (va + (vb - va) * (s - a) / (b - a)) * (-r * s).exp();
            acc.add(quad::integrate(seg, a, b, 1e-17, 1e-14));
        }
        acc.value()
    }
}

/// Mean infectivity `A(t)` as a function of infection age.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    /// `A(t) = (1 + t)^{-p}`, `p > 1`.
    PowerLaw {
        p: f64,
    },
    /// Normal density with mean `mu` and standard deviation `sigma`.
    Gaussian {
        mu: f64,
        sigma: f64,
    },
    /// `λ·e^{-λt}` when `normalized`, otherwise `e^{-λt}`.
    Exponential {
        lambda: f64,
        normalized: bool,
    },
    Tabulated(Table),
}

impl Kernel {
    pub fn power_law(p: f64) -> Result<Self> {
        Kernel::PowerLaw { p }.validated()
    }

    pub fn gaussian(mu: f64, sigma: f64) -> Result<Self> {
        Kernel::Gaussian { mu, sigma }.validated()
    }

    pub fn exponential(lambda: f64, normalized: bool) -> Result<Self> {
        Kernel::Exponential { lambda, normalized }.validated()
    }

    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Ok(Kernel::Tabulated(Table::new(grid, values)?))
    }

    /// Checks the family parameters. Tables are checked on construction.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Kernel::PowerLaw { p } => {
                if !(p.is_finite() && p > 1.0) {
                    return Err(Error::invalid("kernel.p", format!("exponent must be > 1, got {p}")));
                }
            }
            Kernel::Gaussian { mu, sigma } => {
                if !mu.is_finite() {
                    return Err(Error::invalid("kernel.mu", format!("must be finite, got {mu}")));
                }
                if !(sigma.is_finite() && sigma > 0.0) {
                    return Err(Error::invalid("kernel.sigma", format!("must be positive, got {sigma}")));
                }
            }
            Kernel::Exponential { lambda, .. } => {
                if !(lambda.is_finite() && lambda > 0.0) {
                    return Err(Error::invalid(
                        "kernel.lambda",
                        format!("must be positive, got {lambda}"),
                    ));
                }
            }
            Kernel::Tabulated(_) => {}
        }
        Ok(())
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// `A(t)` for `t ≥ 0`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        check_time("t", t)?;
        Ok(self.value(t))
    }

    /// Unchecked evaluation; `t` must be non-negative.
    pub(crate) fn value(&self, t: f64) -> f64 {
        match self {
            Kernel::PowerLaw { p } => (1.0 + t).powf(-p),
            Kernel::Gaussian { mu, sigma } => {
                let z = (t - mu) / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
            }
            Kernel::Exponential { lambda, normalized } => {
                let scale = if *normalized { *lambda } else { 1.0 };
                scale * (-lambda * t).exp()
            }
            Kernel::Tabulated(table) => table.interp(t),
        }
    }

    /// `sup_{t ≥ 0} A(t)`.
    pub fn sup(&self) -> f64 {
        self.sup_from(0.0)
    }

    fn sup_from(&self, t: f64) -> f64 {
        match self {
            Kernel::Gaussian { mu, .. } => self.value(t.max(*mu)),
            Kernel::Tabulated(table) => table.max_from(t),
            Kernel::PowerLaw { .. } | Kernel::Exponential { .. } => self.value(t),
        }
    }

    /// `∫_{t0}^∞ A(s) ds`. Closed form for the analytic families, exact
    /// trapezoidal integration for tables.
    pub fn integral_tail(&self, t0: f64, tol: f64) -> Result<f64> {
        check_time("t0", t0)?;
        check_tol(tol)?;
        Ok(self.tail_mass(t0))
    }

    fn tail_mass(&self, t0: f64) -> f64 {
        match self {
            Kernel::PowerLaw { p } => (1.0 + t0).powf(1.0 - p) / (p - 1.0),
            Kernel::Gaussian { mu, sigma } => normal_upper_tail((t0 - mu) / sigma),
            Kernel::Exponential { lambda, normalized } => {
                let scale = if *normalized { 1.0 } else { 1.0 / lambda };
                scale * (-lambda * t0).exp()
            }
            Kernel::Tabulated(table) => table.integral_from(t0),
        }
    }

    /// Total variation `∫_0^∞ |A'(t)| dt`.
    pub fn deriv_l1(&self) -> f64 {
        match self {
            // Monotone decreasing from A(0) to 0.
            Kernel::PowerLaw { .. } | Kernel::Exponential { .. } => self.value(0.0),
            Kernel::Gaussian { mu, .. } => {
                if *mu > 0.0 {
                    2.0 * self.value(*mu) - self.value(0.0)
                } else {
                    self.value(0.0)
                }
            }
            Kernel::Tabulated(table) => table.total_variation(),
        }
    }

    /// `h·Σ_{n≥0} A(t_{n+1})`, the right-rectangle approximation of `∫_0^∞ A`.
    pub fn discrete_series(&self, h: f64, tol: f64) -> Result<f64> {
        self.discrete_series_capped(h, tol, DEFAULT_TERM_CAP)
    }

    pub fn discrete_series_capped(&self, h: f64, tol: f64, cap: u64) -> Result<f64> {
        check_step(h)?;
        check_tol(tol)?;
        self.weighted_series(h, 0.0, tol, cap)
    }

    /// `h·Σ_{n≥0} A(t_{n+1})·(1 + r·h)^{-(n+1)}` for `r > -1/h`.
    ///
    /// Returns `+∞` when the series diverges (heavy-tailed kernels with
    /// `r < 0`).
    pub fn discrete_laplace(&self, h: f64, r: f64, tol: f64) -> Result<f64> {
        check_step(h)?;
        check_tol(tol)?;
        if !(r * h > -1.0) {
            return Err(Error::Domain {
                what: "r",
                value: r,
                reason: "must exceed -1/h",
            });
        }
        let kappa = (r * h).ln_1p() / h;
        self.weighted_series(h, kappa, tol, DEFAULT_TERM_CAP)
    }

    /// `∫_0^∞ A(s)·e^{-r·s} ds`; `+∞` where the integral diverges.
    pub fn laplace(&self, r: f64, tol: f64) -> Result<f64> {
        check_tol(tol)?;
        if r.is_nan() {
            return Err(Error::Domain {
                what: "r",
                value: r,
                reason: "must be a number",
            });
        }
        Ok(match self {
            Kernel::PowerLaw { p } => {
                if r < 0.0 {
                    f64::INFINITY
                } else {
                    power_law_weighted_tail(*p, 0.0, r)
                }
            }
            Kernel::Gaussian { mu, sigma } => {
                // Completing the square: e^{-rμ + r²σ²/2}·P(Z > (rσ² − μ)/σ),
                // rewritten with erfcx so neither factor overflows.
                let z = (r * sigma * sigma - mu) / (sigma * std::f64::consts::SQRT_2);
                if z < 0.0 {
                    (-r * mu + 0.5 * r * r * sigma * sigma).exp() * normal_upper_tail(z * std::f64::consts::SQRT_2)
                } else {
                    0.5 * (-0.5 * (mu / sigma).powi(2)).exp() * erfcx(z)
                }
            }
            Kernel::Exponential { lambda, normalized } => {
                if lambda + r <= 0.0 {
                    f64::INFINITY
                } else {
                    let scale = if *normalized { *lambda } else { 1.0 };
                    scale / (lambda + r)
                }
            }
            Kernel::Tabulated(table) => table.laplace(r),
        })
    }

    /// `h·Σ_{m≥1} A(t_m)·e^{-κ·t_m}` with `t_m = m·h`.
    fn weighted_series(&self, h: f64, kappa: f64, tol: f64, cap: u64) -> Result<f64> {
        if kappa < 0.0 {
            match self {
                Kernel::PowerLaw { .. } => return Ok(f64::INFINITY),
                Kernel::Exponential { lambda, .. } if lambda + kappa <= 0.0 => return Ok(f64::INFINITY),
                _ => {}
            }
        }
        let step_decay = (-kappa * h).exp();
        let mut acc = CompensatedSum::new();
        let mut m: u64 = 1;
        loop {
            if m > cap {
                return Err(Error::SeriesDivergence { cap, h });
            }
            let t = m as f64 * h;
            let a = self.value(t);
            let term = if a == 0.0 { 0.0 } else { a * (-kappa * t).exp() };
            if !term.is_finite() {
                return Ok(f64::INFINITY);
            }
            acc.add(term);

            if let Kernel::PowerLaw { p } = self {
                if kappa >= 0.0 {
                    if let Some(tail) = euler_maclaurin_tail(*p, kappa, h, t, tol) {
                        return Ok(h * acc.value() + tail);
                    }
                }
            }
            if kappa == 0.0 {
                if a <= tol && self.tail_mass(t) <= tol {
                    break;
                }
            } else {
                if let Kernel::Tabulated(table) = self {
                    if t >= table.last_time() {
                        break;
                    }
                }
                if kappa > 0.0 {
                    let bound = h * self.sup_from(t) * (-kappa * t).exp() * step_decay / (1.0 - step_decay);
                    if bound <= tol {
                        break;
                    }
                }
                if let Some(ratio) = self.log_concave_ratio(t, h) {
                    let ratio = ratio * step_decay;
                    if ratio < 1.0 && h * term * ratio / (1.0 - ratio) <= tol {
                        break;
                    }
                }
            }
            m += 1;
        }
        Ok(h * acc.value())
    }

    // A(t + h)/A(t) for the log-concave families, whose ratio is
    // non-increasing in t so that the remaining tail is geometric-bounded.
    fn log_concave_ratio(&self, t: f64, h: f64) -> Option<f64> {
        match self {
            Kernel::Gaussian { mu, sigma } => Some((-(2.0 * (t - mu) * h + h * h) / (2.0 * sigma * sigma)).exp()),
            Kernel::Exponential { lambda, .. } => Some((-lambda * h).exp()),
            _ => None,
        }
    }
}

/// `∫_{t0}^∞ (1+s)^{-p} e^{-κs} ds` for `κ ≥ 0`.
///
/// With `x = (1 + t0)·u^{-1/(p-1)}` the integrand becomes bounded on
/// `[0, 1]` and equal to one at `u = 1`.
fn power_law_weighted_tail(p: f64, t0: f64, kappa: f64) -> f64 {
    let x0 = 1.0 + t0;
    let mass = x0.powf(1.0 - p) / (p - 1.0);
    if kappa == 0.0 {
        return mass;
    }
    let expo = -1.0 / (p - 1.0);
    let scaled = kappa * x0;
    let integrand = |u: f64| {
        if u <= 0.0 {
            0.0
        } else {
            (-scaled * (u.powf(expo) - 1.0)).exp()
        }
    };
    (-kappa * t0).exp() * mass * quad::integrate(integrand, 0.0, 1.0, 1e-17, 1e-14)
}

// Bernoulli coefficients B_{2k}/(2k)! for k = 1..4.
const EM_COEFFS: [f64; 4] = [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30_240.0, -1.0 / 1_209_600.0];

/// Closes `h·Σ_{k>m} f(t_k)` for `f(t) = (1+t)^{-p} e^{-κt}` once the first
/// omitted Euler–Maclaurin term is below `tol`; `None` if not yet.
fn euler_maclaurin_tail(p: f64, kappa: f64, h: f64, t: f64, tol: f64) -> Option<f64> {
    if 1.0 + t < 8.0 * h {
        return None;
    }
    let derivs = power_law_weighted_derivatives(p, kappa, t);
    let remainder = (h.powi(8) * derivs[7] * EM_COEFFS[3]).abs();
    if remainder > tol {
        return None;
    }
    let mut tail = power_law_weighted_tail(p, t, kappa) - 0.5 * h * derivs[0];
    for (k, coeff) in EM_COEFFS.iter().take(3).enumerate() {
        let order = 2 * k + 1;
        tail -= coeff * h.powi(order as i32 + 1) * derivs[order];
    }
    Some(tail)
}

/// Derivatives of order 0..=7 of `(1+t)^{-p} e^{-κt}` via Leibniz' rule.
fn power_law_weighted_derivatives(p: f64, kappa: f64, t: f64) -> [f64; 8] {
    let x = 1.0 + t;
    let mut pure = [0.0; 8];
    let mut rising = 1.0;
    for (i, slot) in pure.iter_mut().enumerate() {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        *slot = sign * rising * x.powf(-p - i as f64);
        rising *= p + i as f64;
    }
    let weight = (-kappa * t).exp();
    let mut out = [0.0; 8];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut binom = 1.0;
        let mut acc = 0.0;
        for (i, &d) in pure.iter().enumerate().take(k + 1) {
            acc += binom * d * (-kappa).powi((k - i) as i32);
            binom = binom * (k - i) as f64 / (i + 1) as f64;
        }
        *slot = acc * weight;
    }
    out
}

pub(crate) fn check_time(what: &'static str, t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value: t,
            reason: "must be a finite non-negative time",
        })
    }
}

pub(crate) fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("tolerance must be positive, got {tol}")))
    }
}

pub(crate) fn check_step(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("step size must be positive, got {h}")))
    }
}
