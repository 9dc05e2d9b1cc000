//! Nonstandard finite-difference (NSFD) solver for the Kermack–McKendrick
//! age-of-infection epidemic model
//!
//! ```text
//! S'(t) = −β·S(t)·φ(t)
//! φ(t)  = φ0(t) + β·∫_0^t A(t − s)·S(s)·φ(s) ds,   φ0(t) = (N − S0)·A(t)
//! ```
//!
//! The scheme keeps `S` positive and non-increasing and `φ` non-negative
//! and bounded by `N·sup A` for every step size. The crate also provides
//! the classical trapezoidal scheme for comparison, the discrete and
//! continuous epidemic indicators, and convergence / final-size studies.
//!
//! ```
//! use aoi_nsfd::{nsfd_run, EpidemicModel, Kernel, SolverConfig};
//!
//! let model = EpidemicModel::new(Kernel::gaussian(0.2, 0.4)?, 1e5, 99_950.0, 3e-5)?;
//! let traj = nsfd_run(&model, &SolverConfig::new(0.1, 40.0))?;
//! assert!(traj.steady_state_reached());
//! # Ok::<(), aoi_nsfd::Error>(())
//! ```

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dq;
pub mod error;
mod fastconv;
pub mod indicators;
pub mod kernel;
pub mod model;
pub mod nsfd;
mod quad;
pub mod roots;
pub mod special;
pub mod studies;
pub mod sum;
pub mod trajectory;

pub use dq::{property_violations, trapz_dq_run, Violation, ViolationKind, ViolationReport};
pub use error::{Error, Result};
pub use indicators::{
    discrete_final_size_check, final_size_from_relation, growth_rate_continuous, growth_rate_discrete,
    indicator_report, r0_continuous, r0_discrete, tau, u_factor, IndicatorReport,
};
pub use kernel::{Kernel, Table};
pub use model::EpidemicModel;
pub use nsfd::{nsfd_run, nsfd_step, steady_state, Convolution, SolverConfig};
pub use studies::{
    convergence_study, error_vs_reference, experimental_order, final_size_sweep, scheme_comparison, ConvergenceRow,
    ErrorNorms, FinalSizeRow, FinalSizeTable, SchemeComparison,
};
pub use trajectory::{Scheme, Trajectory};
