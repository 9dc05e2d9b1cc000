//! Discrete solutions on a uniform mesh.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Nsfd,
    TrapezoidalDq,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scheme::Nsfd => f.write_str("nsfd"),
            Scheme::TrapezoidalDq => f.write_str("trapz"),
        }
    }
}

/// Mesh values `(t_n, S_n, φ_n)` for `t_n = n·h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    scheme: Scheme,
    h: f64,
    population: f64,
    s: Vec<f64>,
    phi: Vec<f64>,
    steady_state_reached: bool,
    s_inf_h: Option<f64>,
}

impl Trajectory {
    /// Assembles a trajectory from raw sequences, without steady-state
    /// metadata. `population` sets the rounding slack used when checking
    /// qualitative properties.
    pub fn from_parts(scheme: Scheme, h: f64, population: f64, s: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        if s.len() != phi.len() {
            return Err(Error::Precondition(format!(
                "S has {} entries but phi has {}",
                s.len(),
                phi.len()
            )));
        }
        if s.is_empty() {
            return Err(Error::Precondition("trajectory must hold at least t = 0".into()));
        }
        Ok(Trajectory {
            scheme,
            h,
            population,
            s,
            phi,
            steady_state_reached: false,
            s_inf_h: None,
        })
    }

    pub(crate) fn with_steady_state(mut self, s_inf: Option<f64>) -> Self {
        self.steady_state_reached = s_inf.is_some();
        self.s_inf_h = s_inf;
        self
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn population(&self) -> f64 {
        self.population
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.h
    }

    pub fn times(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.s.len()).map(|n| self.time(n))
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn steady_state_reached(&self) -> bool {
        self.steady_state_reached
    }

    /// Limiting susceptible value, when steady state was detected.
    pub fn s_inf_h(&self) -> Option<f64> {
        self.s_inf_h
    }

    pub fn last_s(&self) -> f64 {
        self.s[self.s.len() - 1]
    }

    pub fn last_phi(&self) -> f64 {
        self.phi[self.phi.len() - 1]
    }
}
