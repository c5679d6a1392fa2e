//! Semiclassical Monte Carlo for the two classical states.
//!
//! Fields are drawn directly at the detection plane, turned into photon flux
//! at the pinhole and behind the mask, given Gaussian shot noise, AC-filtered
//! and correlated. Each trial is one averaging interval T_I.

pub mod detect;
pub mod synth;

use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::analytic::{self, SnrQuery};
use crate::error::{invalid, Error, Result};
use crate::model::{MaskShape, MaskSpec, SourceKind, SystemConfig};
pub use detect::{detect, filter_response, shot_counts, Filter};
use synth::{covariance_sqrt, BucketModes, TemporalSynth};

/// Largest grid for the dense mode decomposition.
pub const MAX_GRID_POINTS: usize = 4096;

/// Bucket-plane grid and time base.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Grid center, m.
    pub center: [f64; 2],
    /// Half side of the square grid, m.
    pub half_width: f64,
    pub points_per_axis: usize,
    /// s.
    pub dt: f64,
    /// Length of one trial, s.
    pub duration: f64,
    pub rng_seed: u64,
}

impl GridSpec {
    /// Grid with step rho/4 over the mask support and the coarsest power-of-two
    /// time base meeting dt <= T0/20 and dt <= 0.2/Omega_B.
    pub fn for_system(sys: &SystemConfig, duration: f64, seed: u64) -> Result<Self> {
        let (a, rho) = sys.geometry.plane_radii(&sys.source)?;
        let mask = bucket_mask(sys);
        let (center, half) = match mask.support() {
            Some((lo, hi)) => (
                [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0],
                (hi[0] - lo[0]) / 2.0,
            ),
            None => ([0.0, 0.0], 3.0 * a),
        };
        let step = rho / 4.0;
        let points = ((2.0 * half / step).ceil() as usize).max(1);
        let t0 = sys.source.coherence_time();
        let dt_max = (t0 / 20.0).min(0.2 / sys.detector.omega_b());
        let n = ((duration / dt_max).ceil() as usize).next_power_of_two();
        Ok(Self {
            center,
            half_width: half,
            points_per_axis: points,
            dt: duration / n as f64,
            duration,
            rng_seed: seed,
        })
    }

    pub fn time_samples(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / self.points_per_axis as f64
    }

    pub fn validate(&self, sys: &SystemConfig) -> Result<()> {
        let (_, rho) = sys.geometry.plane_radii(&sys.source)?;
        let t0 = sys.source.coherence_time();
        let tol = 1.0 + 1e-12;
        if self.dt > tol * t0 / 20.0 || self.dt > tol * 0.2 / sys.detector.omega_b() {
            return Err(invalid("grid.dt", "must satisfy dt <= T0/20 and dt <= 0.2/Omega_B"));
        }
        if self.step() > tol * rho / 4.0 {
            return Err(invalid("grid.points", "spatial step must be <= rho/4"));
        }
        let pts = self.points_per_axis * self.points_per_axis;
        if pts > MAX_GRID_POINTS {
            return Err(invalid(
                "grid.points",
                format!("{pts} grid points exceed the dense-decomposition limit {MAX_GRID_POINTS}"),
            ));
        }
        Ok(())
    }
}

/// The mask as the bucket meets the reference speckle: mirrored for
/// phase-sensitive light in the far field.
fn bucket_mask(sys: &SystemConfig) -> MaskSpec {
    if sys.image_inverted() {
        sys.mask.mirrored()
    } else {
        sys.mask
    }
}

fn require_classical(kind: SourceKind) -> Result<()> {
    if kind == SourceKind::QuantumPhaseSensitive {
        return Err(Error::UnsupportedState(
            "the quantum state has no proper P representation; use the wick oracle".into(),
        ));
    }
    Ok(())
}

/// Field samples at a set of detection-plane points, sqrt(photons / m^2 s).
#[derive(Clone, Debug)]
pub struct FieldPaths {
    pub dt: f64,
    /// e1[point][time]
    pub e1: Vec<Vec<Complex64>>,
    pub e2: Vec<Vec<Complex64>>,
}

/// One realization of the signal/reference pair on `points` (m) for `n_time` steps.
/// Thermal: both arms carry the same speckle. Classical phase-sensitive: the
/// second arm is its conjugate, point-reflected in the far field.
pub fn synthesize_fields(
    sys: &SystemConfig,
    grid: &GridSpec,
    points: &[[f64; 2]],
    n_time: usize,
    seed: u64,
) -> Result<FieldPaths> {
    require_classical(sys.source.kind())?;
    let term = sys.auto_kernel()?.terms()[0];
    let t0 = sys.source.coherence_time();
    let inverted = sys.image_inverted();
    let mut all: Vec<[f64; 2]> = points.to_vec();
    if inverted {
        all.extend(points.iter().map(|p| [-p[0], -p[1]]));
    }
    let m = all.len();
    let cov = nalgebra::DMatrix::from_fn(m, m, |i, j| synth::coherence(all[i], all[j], term.coherence));
    let root = covariance_sqrt(cov);
    let temporal = TemporalSynth::new(n_time, grid.dt / t0, term.duration / t0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scratch = vec![Complex64::new(0.0, 0.0); temporal.scratch_len()];
    let mut path = vec![Complex64::new(0.0, 0.0); n_time];
    let mut s = vec![vec![Complex64::new(0.0, 0.0); n_time]; m];
    for k in 0..m {
        temporal.draw(&mut rng, &mut path, &mut scratch);
        for (j, sj) in s.iter_mut().enumerate() {
            let c = root[(j, k)];
            if c != 0.0 {
                for (v, z) in sj.iter_mut().zip(&path) {
                    *v += z * c;
                }
            }
        }
    }
    let amp = term.amplitude.re.sqrt();
    let env = |p: [f64; 2]| (-(p[0] * p[0] + p[1] * p[1]) / (term.envelope * term.envelope)).exp();
    let n = points.len();
    let e1: Vec<Vec<Complex64>> = (0..n)
        .map(|j| s[j].iter().map(|z| z * (amp * env(all[j]))).collect())
        .collect();
    let e2 = match sys.source.kind() {
        SourceKind::Thermal => e1.clone(),
        _ => (0..n)
            .map(|j| {
                let src = if inverted { n + j } else { j };
                s[src].iter().map(|z| z.conj() * (amp * env(all[src]))).collect()
            })
            .collect(),
    };
    Ok(FieldPaths { dt: grid.dt, e1, e2 })
}

/// Per-trial output.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    /// A^2.
    pub c_hat: f64,
    /// Photons/s at the pinhole and into the bucket.
    pub mean_flux_pinhole: f64,
    pub mean_flux_bucket: f64,
    /// Mean-square filtered currents, A^2.
    pub power_pinhole: f64,
    pub power_bucket: f64,
}

/// Everything fixed across trials, in units of rho and T0.
pub struct Simulator {
    modes: BucketModes,
    /// Speckle is drawn on a coarse grid that still holds the intensity band,
    /// then interpolated exactly onto the detection time base.
    temporal: TemporalSynth,
    coarse_fwd: Arc<dyn Fft<f64>>,
    fine_inv: Arc<dyn Fft<f64>>,
    filter: Filter,
    n: usize,
    dt: f64,
    /// eta * mean flux density * envelope^2 at the pinhole * a1.
    pin_scale: f64,
    bucket_scale: f64,
    /// Ensemble-mean counts per step, subtracted before filtering.
    pin_mean: f64,
    bucket_mean: f64,
    t0: f64,
    q: f64,
    seed: u64,
    pub warnings: Vec<String>,
}

/// Fraction of a grid cell inside a disk, by sub-sampling.
fn disk_coverage(cx: f64, cy: f64, h: f64, center: [f64; 2], r: f64) -> f64 {
    const SUB: usize = 8;
    let mut inside = 0;
    for i in 0..SUB {
        for j in 0..SUB {
            let x = cx - h / 2.0 + (i as f64 + 0.5) * h / SUB as f64 - center[0];
            let y = cy - h / 2.0 + (j as f64 + 0.5) * h / SUB as f64 - center[1];
            if x * x + y * y <= r * r {
                inside += 1;
            }
        }
    }
    inside as f64 / (SUB * SUB) as f64
}

impl Simulator {
    pub fn new(sys: &SystemConfig, grid: &GridSpec) -> Result<Self> {
        require_classical(sys.source.kind())?;
        grid.validate(sys)?;
        let (_, rho) = sys.geometry.plane_radii(&sys.source)?;
        let t0 = sys.source.coherence_time();
        let term = sys.auto_kernel()?.terms()[0];
        let env = term.envelope / rho;
        let coh = term.coherence / rho;
        // mean photons per rho^2 per T0 at the beam center
        let density = term.amplitude.re * rho * rho * t0;
        let det = &sys.detector;
        let mask = bucket_mask(sys);
        let h = grid.step() / rho;
        let np = grid.points_per_axis;
        let mut points = Vec::with_capacity(np * np);
        let mut weights = Vec::with_capacity(np * np);
        for i in 0..np {
            for j in 0..np {
                let x = (grid.center[0] - grid.half_width) / rho + (i as f64 + 0.5) * h;
                let y = (grid.center[1] - grid.half_width) / rho + (j as f64 + 0.5) * h;
                let t2 = match mask.shape {
                    MaskShape::Disk { radius } => {
                        let c = [mask.center[0] / rho, mask.center[1] / rho];
                        disk_coverage(x, y, h, c, radius / rho)
                    }
                    _ => mask.intensity_at([x * rho, y * rho]),
                };
                let w = h * h * t2 * (-2.0 * (x * x + y * y) / (env * env)).exp();
                if w > 0.0 {
                    points.push([x, y]);
                    weights.push(w);
                }
            }
        }
        if points.is_empty() {
            return Err(invalid("mask", "no grid cell transmits light"));
        }
        let p = det.pinhole_pos();
        let pin = [p[0] / rho, p[1] / rho];
        let modes = BucketModes::new(&points, &weights, pin, coh, 1e-7);
        let n = grid.time_samples();
        let dt = grid.dt / t0;
        let dur = term.duration / t0;
        // the intensity occupies twice the field band; keep it below the coarse Nyquist bin
        let field_band = TemporalSynth::new(n, dt, dur).max_bin();
        let n_coarse = (4 * field_band + 2).next_power_of_two().min(n);
        let span = n as f64 * dt;
        let mut planner = FftPlanner::new();
        let a1 = det.pinhole_area() / (rho * rho);
        let env_pin = (-2.0 * (pin[0] * pin[0] + pin[1] * pin[1]) / (env * env)).exp();
        let pin_scale = det.eta() * density * a1 * env_pin;
        let bucket_scale = det.eta() * density;
        let mut warnings = Vec::new();
        let min_count = pin_scale * dt;
        if min_count < 10.0 {
            warnings.push(format!(
                "pinhole mean count per step is {min_count:.3e} < 10; Gaussian shot noise keeps only the first two moments"
            ));
        }
        let temporal = TemporalSynth::new(n_coarse, span / n_coarse as f64, dur);
        let var = temporal.variance();
        let pin_mean = pin_scale * dt * var * (modes.g.iter().map(|g| g * g).sum::<f64>() + modes.residual.powi(2));
        let bucket_mean = bucket_scale * dt * var * modes.lambda.iter().sum::<f64>();
        Ok(Self {
            modes,
            temporal,
            coarse_fwd: planner.plan_fft_forward(n_coarse),
            fine_inv: planner.plan_fft_inverse(n),
            filter: Filter::for_fluctuations(n, dt, det.omega_b() * t0, det.omega_n() * t0),
            n,
            dt,
            pin_scale,
            bucket_scale,
            pin_mean,
            bucket_mean,
            t0,
            q: det.charge(),
            seed: grid.rng_seed,
            warnings,
        })
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    fn rng_for(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    /// Normalized pinhole and bucket flux paths for one trial (photons per T0).
    fn flux(&self, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
        let nc = self.temporal.len();
        let zero = Complex64::new(0.0, 0.0);
        let mut scratch = vec![zero; self.temporal.scratch_len()];
        let mut path = vec![zero; nc];
        let mut sp = vec![zero; nc];
        let mut bucket = vec![0.0; nc];
        for (&l, &g) in self.modes.lambda.iter().zip(&self.modes.g) {
            self.temporal.draw(rng, &mut path, &mut scratch);
            for ((b, s), z) in bucket.iter_mut().zip(sp.iter_mut()).zip(&path) {
                *b += l * z.norm_sqr();
                *s += z * g;
            }
        }
        if self.modes.residual > 0.0 {
            self.temporal.draw(rng, &mut path, &mut scratch);
            for (s, z) in sp.iter_mut().zip(&path) {
                *s += z * self.modes.residual;
            }
        }
        let mut coarse: Vec<Complex64> = sp
            .iter()
            .zip(&bucket)
            .map(|(z, &b)| Complex64::new(self.pin_scale * z.norm_sqr(), self.bucket_scale * b))
            .collect();
        if nc == self.n {
            return coarse.iter().map(|z| (z.re, z.im)).unzip();
        }
        // band-limited interpolation by zero padding
        let mut s2 = vec![zero; self.coarse_fwd.get_inplace_scratch_len().max(1)];
        self.coarse_fwd.process_with_scratch(&mut coarse, &mut s2);
        let mut fine = vec![zero; self.n];
        let half = nc / 2;
        for k in 0..half {
            fine[k] = coarse[k] / nc as f64;
        }
        for k in half + 1..nc {
            fine[self.n - (nc - k)] = coarse[k] / nc as f64;
        }
        let mut s3 = vec![zero; self.fine_inv.get_inplace_scratch_len().max(1)];
        self.fine_inv.process_with_scratch(&mut fine, &mut s3);
        fine.iter().map(|z| (z.re.max(0.0), z.im.max(0.0))).unzip()
    }

    pub fn run_trial(&self, index: u64) -> TrialResult {
        let mut rng = self.rng_for(index);
        let (f1, f2) = self.flux(&mut rng);
        let mut buf: Vec<Complex64> = f1
            .iter()
            .zip(&f2)
            .map(|(&a, &b)| {
                Complex64::new(
                    shot_counts(a, self.dt, &mut rng) - self.pin_mean,
                    shot_counts(b, self.dt, &mut rng) - self.bucket_mean,
                )
            })
            .collect();
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.filter.scratch_len()];
        self.filter.apply(&mut buf, &mut scratch);
        let n = self.n as f64;
        let (mut c, mut p1, mut p2) = (0.0, 0.0, 0.0);
        for z in &buf {
            c += z.re * z.im;
            p1 += z.re * z.re;
            p2 += z.im * z.im;
        }
        let s = (self.q / self.t0).powi(2) / n;
        TrialResult {
            c_hat: c * s,
            mean_flux_pinhole: f1.iter().sum::<f64>() / n / self.t0,
            mean_flux_bucket: f2.iter().sum::<f64>() / n / self.t0,
            power_pinhole: p1 * s,
            power_bucket: p2 * s,
        }
    }

    /// Trials 0..n in index order, run in parallel.
    pub fn run(&self, n_trials: usize) -> Vec<TrialResult> {
        (0..n_trials as u64).into_par_iter().map(|i| self.run_trial(i)).collect()
    }
}

/// SNR estimate from independent trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub snr_hat: f64,
    /// Jackknife standard error of snr_hat.
    pub stderr: f64,
    pub n_trials: usize,
    /// Closed-form SNR for the same configuration, when one applies.
    pub analytic_ref: Option<f64>,
    /// Sample mean of C and its standard error, A^2.
    pub mean_c: f64,
    pub mean_c_stderr: f64,
    /// stderr / snr_hat above 0.5.
    pub inconclusive: bool,
    pub warnings: Vec<String>,
}

/// mean^2/var over the sample and its leave-one-out jackknife error.
pub fn jackknife_snr(c: &[f64]) -> (f64, f64) {
    let n = c.len();
    let nf = n as f64;
    let mean = c.iter().sum::<f64>() / nf;
    // centered sums avoid cancellation in the leave-one-out variances
    let d: Vec<f64> = c.iter().map(|v| v - mean).collect();
    let s2: f64 = d.iter().map(|v| v * v).sum();
    let var = s2 / (nf - 1.0);
    let snr = mean * mean / var;
    let loo: Vec<f64> = d
        .iter()
        .map(|&di| {
            let m = mean - di / (nf - 1.0);
            let shift = -di / (nf - 1.0);
            // sum over j != i of (d_j - shift)^2
            let ss = s2 - di * di - 2.0 * shift * (-di) + (nf - 1.0) * shift * shift;
            m * m / (ss / (nf - 2.0))
        })
        .collect();
    let avg = loo.iter().sum::<f64>() / nf;
    let jv = (nf - 1.0) / nf * loo.iter().map(|t| (t - avg).powi(2)).sum::<f64>();
    (snr, jv.sqrt())
}

/// Run `n_trials` independent trials of length T_I and estimate the SNR.
pub fn estimate_snr(sys: &SystemConfig, averaging_time: f64, n_trials: usize, seed: u64) -> Result<McEstimate> {
    let grid = GridSpec::for_system(sys, averaging_time, seed)?;
    estimate_snr_on(sys, &grid, n_trials)
}

pub fn estimate_snr_on(sys: &SystemConfig, grid: &GridSpec, n_trials: usize) -> Result<McEstimate> {
    require_classical(sys.source.kind())?;
    let t0 = sys.source.coherence_time();
    let need = 100.0 * t0.max(1.0 / sys.detector.omega_b());
    if grid.duration < need * (1.0 - 1e-12) {
        return Err(invalid("correlator.TI", format!("T_I must be >= {need:.3e} s")));
    }
    if n_trials < 100 {
        return Err(invalid("trials", "at least 100 trials are needed"));
    }
    let sim = Simulator::new(sys, grid)?;
    let trials = sim.run(n_trials);
    let c: Vec<f64> = trials.iter().map(|t| t.c_hat).collect();
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonConvergence("non-finite trial correlation".into()));
    }
    let (snr_hat, stderr) = jackknife_snr(&c);
    let nf = n_trials as f64;
    let mean_c = c.iter().sum::<f64>() / nf;
    let sd = (c.iter().map(|v| (v - mean_c).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();
    let analytic_ref = SnrQuery::new(*sys, grid.duration)
        .and_then(|q| analytic::snr(&q))
        .ok()
        .map(|r| r.snr);
    Ok(McEstimate {
        snr_hat,
        stderr,
        n_trials,
        analytic_ref,
        mean_c,
        mean_c_stderr: sd / nf.sqrt(),
        inconclusive: stderr / snr_hat > 0.5,
        warnings: sim.warnings,
    })
}
