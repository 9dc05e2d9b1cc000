//! Epidemic problem data.

use crate::error::{Error, Result};
use crate::kernel::{check_time, Kernel};

/// Kernel, population size `N`, initial susceptibles `S0` and contact
/// rate `β`. Initial infectives all have infection age zero, so the
/// infectivity of the founding cohort is `φ0(t) = (N − S0)·A(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpidemicModel {
    pub kernel: Kernel,
    pub population: f64,
    pub s0: f64,
    pub beta: f64,
}

impl EpidemicModel {
    /// Builds and validates a model.
    pub fn new(kernel: Kernel, population: f64, s0: f64, beta: f64) -> Result<Self> {
        EpidemicModel {
            kernel,
            population,
            s0,
            beta,
        }
        .validate()
    }

    /// Returns the model unchanged if every invariant holds.
    pub fn validate(self) -> Result<Self> {
        self.kernel.validate()?;
        if !(self.population.is_finite() && self.population > 0.0) {
            return Err(Error::invalid("N", "N must be positive"));
        }
        if !(self.s0.is_finite() && self.s0 >= 0.0) {
            return Err(Error::invalid("S0", "S0 must be non-negative"));
        }
        if self.s0 > self.population {
            return Err(Error::invalid("S0", "S0 exceeds N"));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::invalid("beta", "beta must be positive"));
        }
        Ok(self)
    }

    /// `φ0(t) = (N − S0)·A(t)`.
    pub fn phi0(&self, t: f64) -> Result<f64> {
        check_time("t", t)?;
        Ok(self.phi0_at(t))
    }

    pub(crate) fn phi0_at(&self, t: f64) -> f64 {
        let infected = self.population - self.s0;
        if infected == 0.0 {
            0.0
        } else {
            infected * self.kernel.value(t)
        }
    }

    pub fn initial_infectives(&self) -> f64 {
        self.population - self.s0
    }

    /// `N·sup A`, the a-priori bound on the infectivity of the NSFD scheme.
    pub fn infectivity_bound(&self) -> f64 {
        self.population * self.kernel.sup()
    }
}
