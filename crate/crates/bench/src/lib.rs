//! Shared fixtures for the solver benchmarks in `benches/`.

use aoi_nsfd::{EpidemicModel, Kernel};

/// Power-law kernel `(1 + t)^-2`, N = 10, S0 = 9, β = 0.3.
pub fn power_law_model() -> EpidemicModel {
    EpidemicModel::new(Kernel::power_law(2.0).unwrap(), 10.0, 9.0, 0.3).unwrap()
}

/// Gaussian kernel (μ = 0.2, σ = 0.4), N = 1e5, S0 = 99 950, β = 3e-5.
pub fn gaussian_model() -> EpidemicModel {
    EpidemicModel::new(Kernel::gaussian(0.2, 0.4).unwrap(), 1e5, 99_950.0, 3e-5).unwrap()
}
