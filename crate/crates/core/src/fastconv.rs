//! Online FFT evaluation of the NSFD history convolution.
//!
//! The convolution `c_m = Σ_{j<m} A(t_{m−j})·w_j` is "relaxed": `w_j`
//! only becomes known after `φ_j` has been computed. The mesh is split
//! recursively; once the left half `[l, mid)` of a block is finished,
//! its contribution to every `c_m` with `m` in `[mid, r)` is added with
//! a single cyclic FFT convolution of length `r − l`, then the right half
//! is solved. Blocks of at most [`BASE`] points are summed directly.

use std::collections::HashMap;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::model::EpidemicModel;
use crate::nsfd::{kernel_samples, SolverConfig, SteadyStateDetector};
use crate::sum::CompensatedSum;

const BASE: usize = 64;

// Kernel spectra up to this length are cached; longer ones are rebuilt on
// demand (they are used by very few blocks).
const CACHE_LIMIT: usize = 1 << 20;

struct Relaxed<'a> {
    model: &'a EpidemicModel,
    hb: f64,
    h: f64,
    steps: usize,
    stop_at_steady_state: bool,
    a: Vec<f64>,
    s: Vec<f64>,
    phi: Vec<f64>,
    w: Vec<f64>,
    conv: Vec<f64>,
    detector: SteadyStateDetector,
    s_inf: Option<f64>,
    done: Option<usize>,
    planner: FftPlanner<f64>,
    spectra: HashMap<usize, Arc<Vec<Complex<f64>>>>,
}

pub(crate) fn run(model: &EpidemicModel, config: &SolverConfig, steps: usize) -> (Vec<f64>, Vec<f64>, Option<f64>) {
    let padded = (steps + 1).next_power_of_two();
    let mut a = kernel_samples(model, config.h, steps);
    a.resize(padded, 0.0);
    let mut state = Relaxed {
        model,
        hb: config.h * model.beta,
        h: config.h,
        steps,
        stop_at_steady_state: config.stop_at_steady_state,
        a,
        s: vec![0.0; steps + 2],
        phi: vec![0.0; steps + 1],
        w: vec![0.0; padded],
        conv: vec![0.0; padded],
        detector: SteadyStateDetector::new(config, model.population),
        s_inf: None,
        done: None,
        planner: FftPlanner::new(),
        spectra: HashMap::new(),
    };
    state.s[0] = model.s0;
    state.solve(0, padded);
    let last = state.done.unwrap_or(steps);
    let mut s = state.s;
    let mut phi = state.phi;
    s.truncate(last + 1);
    phi.truncate(last + 1);
    (s, phi, state.s_inf)
}

impl Relaxed<'_> {
    fn solve(&mut self, l: usize, r: usize) {
        if self.done.is_some() || l > self.steps {
            return;
        }
        if r - l <= BASE {
            self.solve_direct(l, r);
            return;
        }
        let mid = l + (r - l) / 2;
        self.solve(l, mid);
        if self.done.is_some() || mid > self.steps {
            return;
        }
        self.spread(l, mid, r);
        self.solve(mid, r);
    }

    fn solve_direct(&mut self, l: usize, r: usize) {
        for m in l..r.min(self.steps + 1) {
            let phi_m = if m == 0 {
                self.model.phi0_at(0.0)
            } else {
                let mut acc = CompensatedSum::new();
                acc.add(self.conv[m]);
                for j in l..m {
                    acc.add(self.a[m - j] * self.w[j]);
                }
                self.model.phi0_at(m as f64 * self.h) + self.hb * acc.value()
            };
            self.phi[m] = phi_m;
            if m >= 1 && self.detector.observe(self.s[m - 1], self.s[m], phi_m) {
                self.s_inf = Some(self.s[m]);
                if self.stop_at_steady_state {
                    self.done = Some(m);
                    return;
                }
            }
            if m < self.steps {
                let s_next = self.s[m] / (1.0 + self.hb * phi_m);
                self.s[m + 1] = s_next;
                self.w[m] = s_next * phi_m;
            }
        }
    }

    /// Adds the contribution of `w[l..mid)` to `conv[mid..r)`.
    fn spread(&mut self, l: usize, mid: usize, r: usize) {
        let len = r - l;
        let kernel = self.spectrum(len);
        let fft = self.planner.plan_fft_forward(len);
        let ifft = self.planner.plan_fft_inverse(len);
        let mut buf: Vec<Complex<f64>> = (0..len)
            .map(|i| {
                let v = if i < mid - l { self.w[l + i] } else { 0.0 };
                Complex::new(v, 0.0)
            })
            .collect();
        fft.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(kernel.iter()) {
            *b *= k;
        }
        ifft.process(&mut buf);
        let scale = 1.0 / len as f64;
        for (k, v) in buf.iter().enumerate().skip(mid - l) {
            self.conv[l + k] += v.re * scale;
        }
    }

    // Spectrum of [0, A(t_1), ..., A(t_{len−1})]. Lags never wrap because
    // the output window [len/2, len) only meets inputs from [0, len/2).
    fn spectrum(&mut self, len: usize) -> Arc<Vec<Complex<f64>>> {
        if let Some(cached) = self.spectra.get(&len) {
            return Arc::clone(cached);
        }
        let fft = self.planner.plan_fft_forward(len);
        let mut buf: Vec<Complex<f64>> = (0..len)
            .map(|d| Complex::new(if d == 0 { 0.0 } else { self.a[d] }, 0.0))
            .collect();
        fft.process(&mut buf);
        let spectrum = Arc::new(buf);
        if len <= CACHE_LIMIT {
            self.spectra.insert(len, Arc::clone(&spectrum));
        }
        spectrum
    }
}

#[cfg(test)]
mod tests {
    use crate::kernel::Kernel;
    use crate::model::EpidemicModel;
    use crate::nsfd::{nsfd_run, Convolution, SolverConfig};

    fn compare(model: &EpidemicModel, h: f64, t_max: f64) -> (f64, f64) {
        let mut cfg = SolverConfig::new(h, t_max);
        let direct = nsfd_run(model, &cfg).unwrap();
        cfg.convolution = Convolution::Fft;
        let fast = nsfd_run(model, &cfg).unwrap();
        assert_eq!(direct.len(), fast.len());
        let mut max_s = 0.0f64;
        let mut max_phi = 0.0f64;
        for n in 0..direct.len() {
            max_s = max_s.max((direct.s()[n] - fast.s()[n]).abs() / direct.s()[n].abs().max(1.0));
            max_phi = max_phi.max((direct.phi()[n] - fast.phi()[n]).abs() / direct.phi()[n].abs().max(1e-300));
        }
        (max_s, max_phi)
    }

    #[test]
    fn matches_direct_convolution_on_power_law() {
        let m = EpidemicModel::new(Kernel::power_law(2.0).unwrap(), 10.0, 9.0, 0.3).unwrap();
        let (ds, dphi) = compare(&m, 0.01, 30.0);
        assert!(ds < 1e-12 && dphi < 1e-10, "{ds} {dphi}");
    }

    #[test]
    fn matches_direct_convolution_through_steady_state() {
        let m = EpidemicModel::new(Kernel::gaussian(0.2, 0.4).unwrap(), 1e5, 99_950.0, 3e-5).unwrap();
        let (ds, _) = compare(&m, 0.05, 60.0);
        assert!(ds < 1e-11, "{ds}");
    }

    #[test]
    fn short_runs_fall_back_to_the_base_case() {
        let m = EpidemicModel::new(Kernel::exponential(1.0, true).unwrap(), 50.0, 40.0, 0.05).unwrap();
        let (ds, dphi) = compare(&m, 0.1, 3.0);
        assert!(ds < 1e-14 && dphi < 1e-13);
    }
}
