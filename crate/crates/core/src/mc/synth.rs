//! Gaussian speckle synthesis at the detection plane.
//!
//! Space and time separate in the Gaussian-Schell kernel, so a field is a sum
//! of spatial modes (Karhunen-Loeve on a grid) each driven by an independent
//! stationary temporal process (periodic spectral synthesis).

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};

/// Draws of one stationary complex process with correlation exp(-tau^2 / 2 dur^2).
pub struct TemporalSynth {
    n: usize,
    /// (bin, amplitude) for every bin whose spectral weight matters.
    bins: Vec<(usize, f64)>,
    ifft: Arc<dyn Fft<f64>>,
}

impl TemporalSynth {
    /// `dt` and `dur` in the same units.
    pub fn new(n: usize, dt: f64, dur: f64) -> Self {
        let span = n as f64 * dt;
        let mut bins = Vec::new();
        for k in 0..n {
            let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            let w = 2.0 * PI * kk / span;
            let arg = 0.5 * (w * dur).powi(2);
            if arg > 40.0 {
                continue;
            }
            // |a_k|^2 = S(w) dw / 2pi, S = sqrt(2 pi) dur exp(-w^2 dur^2 / 2)
            let s = (2.0 * PI).sqrt() * dur * (-arg).exp();
            bins.push((k, (s / span).sqrt()));
        }
        let ifft = FftPlanner::new().plan_fft_inverse(n);
        Self { n, bins, ifft }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// E|z(t)|^2 of one path.
    pub fn variance(&self) -> f64 {
        self.bins.iter().map(|&(_, a)| a * a).sum()
    }

    /// Highest occupied bin index |k|.
    pub fn max_bin(&self) -> usize {
        self.bins
            .iter()
            .map(|&(k, _)| if k <= self.n / 2 { k } else { self.n - k })
            .max()
            .unwrap_or(0)
    }

    /// Fill `out` with one sample path; `scratch` must hold n values.
    pub fn draw<R: Rng>(&self, rng: &mut R, out: &mut [Complex64], scratch: &mut [Complex64]) {
        out.fill(Complex64::new(0.0, 0.0));
        for &(k, a) in &self.bins {
            out[k] = complex_normal(rng) * a;
        }
        let need = self.ifft.get_inplace_scratch_len();
        self.ifft.process_with_scratch(out, &mut scratch[..need]);
    }

    pub fn scratch_len(&self) -> usize {
        self.ifft.get_inplace_scratch_len().max(1)
    }
}

/// Circular complex normal with E|z|^2 = 1.
pub fn complex_normal<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn coherence(p: [f64; 2], q: [f64; 2], coh: f64) -> f64 {
    let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
    (-d2 / (2.0 * coh * coh)).exp()
}

/// Modes of the bucket's weighted quadratic form, plus the pinhole's
/// projection on them.
///
/// With S unit-variance speckle on the grid and weights w, the bucket sees
/// sum_j w_j |S_j|^2 = sum_k lambda_k |y_k|^2 for independent y_k, and the
/// pinhole sample is S_p = sum_k g_k y_k + residual * y_res.
#[derive(Clone, Debug)]
pub struct BucketModes {
    pub lambda: Vec<f64>,
    pub g: Vec<f64>,
    pub residual: f64,
}

impl BucketModes {
    /// Modes are kept, largest first, until the dropped ones hold less than
    /// `tail` of the trace.
    pub fn new(points: &[[f64; 2]], weights: &[f64], pin: [f64; 2], coh: f64, tail: f64) -> Self {
        let n = points.len();
        let sw: Vec<f64> = weights.iter().map(|w| w.max(0.0).sqrt()).collect();
        let a = DMatrix::from_fn(n, n, |i, j| sw[i] * sw[j] * coherence(points[i], points[j], coh));
        let eig = SymmetricEigen::new(a);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let trace: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();
        let mut left = trace;
        let c: Vec<f64> = points.iter().map(|&x| coherence(pin, x, coh)).collect();
        let mut lambda = Vec::new();
        let mut g = Vec::new();
        for &k in &order {
            let l = eig.eigenvalues[k];
            if l <= 0.0 || left < tail * trace {
                break;
            }
            left -= l;
            let col = eig.eigenvectors.column(k);
            let proj: f64 = (0..n).map(|j| col[j] * sw[j] * c[j]).sum();
            lambda.push(l);
            g.push(proj / l.sqrt());
        }
        let captured: f64 = g.iter().map(|v| v * v).sum();
        Self {
            lambda,
            g,
            residual: (1.0 - captured).max(0.0).sqrt(),
        }
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }
}

/// Square root of a covariance matrix by eigendecomposition, clipping the
/// small negative eigenvalues that round-off leaves behind.
pub fn covariance_sqrt(cov: DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(cov);
    let d = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    eig.eigenvectors * DMatrix::from_diagonal(&d)
}
