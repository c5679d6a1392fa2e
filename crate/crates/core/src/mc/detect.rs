//! Shot noise and AC-coupled filtering of photon-flux sample paths.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};

/// H(w) = exp(-2 w^2/W_B^2) - exp(-2 w^2/W_N^2), with H(0) = 0 exactly.
pub fn filter_response(w: f64, omega_b: f64, omega_n: f64) -> f64 {
    if w == 0.0 {
        return 0.0;
    }
    let mut h = (-2.0 * w * w / (omega_b * omega_b)).exp();
    if omega_n > 0.0 {
        h -= (-2.0 * w * w / (omega_n * omega_n)).exp();
    }
    h
}

/// FFT filter for real paths of fixed length. Two paths go through one complex
/// transform, since the response is real and even.
pub struct Filter {
    n: usize,
    dt: f64,
    gain: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Filter {
    /// Frequencies in rad per unit of `dt`.
    pub fn new(n: usize, dt: f64, omega_b: f64, omega_n: f64) -> Self {
        let span = n as f64 * dt;
        let gain = (0..n)
            .map(|k| {
                let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
                filter_response(2.0 * PI * kk / span, omega_b, omega_n)
            })
            .collect();
        let mut planner = FftPlanner::new();
        Self {
            n,
            dt,
            gain,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    /// Same filter for inputs whose ensemble mean is already removed. A
    /// zero-width notch then has nothing left to take out, so the record's
    /// DC bin keeps its fluctuation; zeroing it would act as a notch of
    /// width 2 pi / (n dt).
    pub fn for_fluctuations(n: usize, dt: f64, omega_b: f64, omega_n: f64) -> Self {
        let mut f = Self::new(n, dt, omega_b, omega_n);
        if omega_n == 0.0 {
            f.gain[0] = 1.0;
        }
        f
    }

    pub fn scratch_len(&self) -> usize {
        self.fwd
            .get_inplace_scratch_len()
            .max(self.inv.get_inplace_scratch_len())
            .max(1)
    }

    /// Currents (per unit charge) from counts per bin: re -> path 1, im -> path 2.
    /// i = (1/dt) h * dN.
    pub fn apply(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.fwd.process_with_scratch(buf, scratch);
        let s = 1.0 / (self.n as f64 * self.dt);
        for (z, g) in buf.iter_mut().zip(&self.gain) {
            *z *= g * s;
        }
        self.inv.process_with_scratch(buf, scratch);
    }

    /// (1/2pi) int |H|^2 dw on this grid.
    pub fn noise_bandwidth(&self) -> f64 {
        let span = self.n as f64 * self.dt;
        self.gain.iter().map(|g| g * g).sum::<f64>() / span
    }
}

/// Photoelectron counts per bin: Gaussian with mean and variance both flux*dt.
pub fn shot_counts<R: Rng>(flux: f64, dt: f64, rng: &mut R) -> f64 {
    let m = flux * dt;
    if m <= 0.0 {
        return 0.0;
    }
    let z: f64 = rng.sample(StandardNormal);
    m + m.sqrt() * z
}

/// Filtered photocurrent for one flux path, with shot noise; charge scales the result.
pub fn detect<R: Rng>(flux: &[f64], filter: &Filter, charge: f64, rng: &mut R) -> Vec<f64> {
    let mut buf: Vec<Complex64> = flux
        .iter()
        .map(|&f| Complex64::new(shot_counts(f, filter.dt, rng), 0.0))
        .collect();
    let mut scratch = vec![Complex64::new(0.0, 0.0); filter.scratch_len()];
    filter.apply(&mut buf, &mut scratch);
    buf.iter().map(|z| charge * z.re).collect()
}
