use thiserror::Error;

use crate::trajectory::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function (e.g. `t < 0`).
    #[error("domain error: {what} = {value} ({reason})")]
    Domain {
        what: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A model or kernel parameter violates its invariant.
    #[error("invalid {field}: {message}")]
    Validation { field: &'static str, message: String },

    /// A solver or study configuration is inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// The discrete kernel series did not settle before the hard term cap.
    #[error("kernel series did not converge within {cap} terms (h = {h})")]
    SeriesDivergence { cap: u64, h: f64 },

    /// The run would need more mesh points than the configured cap.
    #[error("run needs {steps} steps, above the cap of {cap}")]
    MemoryGuard { steps: usize, cap: usize },

    #[error("root not found: {0}")]
    RootNotFound(String),

    /// The per-step implicit system of the trapezoidal scheme could not be
    /// resolved. `partial` holds every step committed before the failure.
    #[error("trapezoidal fixed-point iteration failed at step n = {n} with h = {h}")]
    FixedPoint { n: usize, h: f64, partial: Box<Trajectory> },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Error::Validation {
            field,
            message: message.into(),
        }
    }
}
