//! Averaging time a quantum source needs, relative to a bright classical one,
//! to reach the same ghost-image SNR.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::{self, Normalized, SnrQuery};
use crate::error::{require_positive, Error, Result};
use crate::model::{brightness, Band, SourceKind, SystemConfig};

/// Bright classical side is assumed at or above this brightness.
pub const CLASSICAL_BRIGHT: f64 = 1e3;
/// Quantum side is assumed at or below this brightness.
pub const QUANTUM_DIM: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Side {
    pub system: SystemConfig,
    pub band: Band,
    /// A'_T/rho^2 replacing the mask's own value.
    pub area_override: Option<f64>,
}

impl Side {
    pub fn new(system: SystemConfig, band: Band) -> Self {
        Self {
            system,
            band,
            area_override: None,
        }
    }

    fn query(&self) -> Result<SnrQuery> {
        let mut q = SnrQuery::new(self.system, self.system.source.coherence_time())?;
        if let Some(m) = self.area_override {
            q = q.with_area_override(m)?;
        }
        Ok(q)
    }

    fn normalized(&self) -> Result<Normalized> {
        self.query()?.normalized()
    }

    /// T_I giving `target` under the full closed form for this side.
    pub fn averaging_time_for(&self, target: f64) -> Result<f64> {
        let r = analytic::snr(&self.query()?)?;
        if r.snr_normalized > 0.0 {
            Ok(target * self.system.source.coherence_time() / r.snr_normalized)
        } else {
            Ok(f64::INFINITY)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionQuery {
    pub classical: Side,
    pub quantum: Side,
    pub target_snr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionReport {
    /// T_I^(q) / T_I^(c).
    pub ratio: f64,
    /// Absolute averaging times for the target SNR, from the full closed forms.
    pub t_quantum: f64,
    pub t_classical: f64,
    /// t_quantum / t_classical; agrees with `ratio` deep in the asymptotic regimes.
    pub inversion_ratio: f64,
    /// Zero transmission or zero flux makes the comparison meaningless.
    pub degenerate: bool,
    pub warnings: Vec<String>,
}

fn side_warnings(q: &AcquisitionQuery, want_q: Band, want_c: Band) -> Result<Vec<String>> {
    let mut w = Vec::new();
    let ic = brightness(&q.classical.system.source).value();
    let iq = brightness(&q.quantum.system.source).value();
    if ic < CLASSICAL_BRIGHT {
        w.push(format!("classical brightness {ic:.3e} below {CLASSICAL_BRIGHT:e}; not saturated"));
    }
    if iq > QUANTUM_DIM {
        w.push(format!("quantum brightness {iq:.3e} above {QUANTUM_DIM}; not in the low-flux regime"));
    }
    if q.quantum.system.source.kind() != SourceKind::QuantumPhaseSensitive {
        w.push("quantum side does not use a quantum source".into());
    }
    if q.classical.system.source.kind() == SourceKind::QuantumPhaseSensitive {
        w.push("classical side uses a quantum source".into());
    }
    if q.quantum.band != want_q || q.classical.band != want_c {
        w.push(format!(
            "band selectors ({:?}, {:?}) differ from the comparison's ({want_c:?}, {want_q:?})",
            q.classical.band, q.quantum.band
        ));
    }
    for (name, side) in [("classical", &q.classical), ("quantum", &q.quantum)] {
        let bt = side.normalized()?.omega_b_t0;
        let band = crate::model::band_of(bt, &Default::default());
        if band != side.band {
            w.push(format!("{name} side has Omega_B T0 = {bt:.3e}, not {:?}", side.band));
        }
    }
    Ok(w)
}

fn finish(q: &AcquisitionQuery, ratio: f64, t: f64, mut warnings: Vec<String>) -> Result<AcquisitionReport> {
    let t_quantum = q.quantum.averaging_time_for(q.target_snr)?;
    let t_classical = q.classical.averaging_time_for(q.target_snr)?;
    let degenerate = t == 0.0 || !t_quantum.is_finite();
    if degenerate {
        warnings.push("zero transmission at the evaluation point".into());
    }
    Ok(AcquisitionReport {
        ratio,
        t_quantum,
        t_classical,
        inversion_ratio: t_quantum / t_classical,
        degenerate,
        warnings,
    })
}

/// Omega_B a0^2 / (eta^2 P A'_T) * rho0^2/A1 * |T|^2, in normalized form.
fn shared_factor(n: &Normalized) -> f64 {
    n.omega_b_t0 * n.rho_sq_over_a1 * n.transmission.powi(2)
        / (n.eta * n.eta * n.brightness * n.area_over_rho_sq)
}

fn validate(q: &AcquisitionQuery) -> Result<()> {
    require_positive("target_snr", q.target_snr)
}

/// Near field, narrowband on both sides.
pub fn time_ratio_narrowband(q: &AcquisitionQuery) -> Result<AcquisitionReport> {
    validate(q)?;
    let n = q.quantum.normalized()?;
    let ratio = PI * PI.sqrt() / (8.0 * 2f64.sqrt()) * shared_factor(&n);
    let w = side_warnings(q, Band::Narrowband, Band::Narrowband)?;
    finish(q, ratio, n.transmission, w)
}

/// Near field, broadband on both sides.
pub fn time_ratio_broadband(q: &AcquisitionQuery) -> Result<AcquisitionReport> {
    validate(q)?;
    let n = q.quantum.normalized()?;
    let ratio = PI * PI.sqrt() / (4.0 * 2f64.sqrt()) * shared_factor(&n);
    let w = side_warnings(q, Band::Broadband, Band::Broadband)?;
    finish(q, ratio, n.transmission, w)
}

/// Broadband low-flux quantum source against a bright narrowband classical one.
pub fn time_ratio_cross_band(q: &AcquisitionQuery) -> Result<AcquisitionReport> {
    validate(q)?;
    let n = q.quantum.normalized()?;
    let omega_b_q = q.quantum.system.detector.omega_b();
    let t0_c = q.classical.system.source.coherence_time();
    let ratio = PI * PI.sqrt() / 2f64.sqrt() * shared_factor(&n) / (omega_b_q * t0_c);
    let w = side_warnings(q, Band::Broadband, Band::Narrowband)?;
    finish(q, ratio, n.transmission, w)
}

/// Pick the closed-form ratio from the band selectors; configurations outside
/// the classical-vs-quantum setting fall back to the inversion ratio.
pub fn compare(q: &AcquisitionQuery) -> Result<AcquisitionReport> {
    validate(q)?;
    let quantum_vs_classical = q.quantum.system.source.kind() == SourceKind::QuantumPhaseSensitive
        && q.classical.system.source.kind().is_classical();
    if quantum_vs_classical {
        return match (q.classical.band, q.quantum.band) {
            (Band::Narrowband, Band::Narrowband) => time_ratio_narrowband(q),
            (Band::Broadband, Band::Broadband) => time_ratio_broadband(q),
            (Band::Narrowband, Band::Broadband) => time_ratio_cross_band(q),
            (c, qb) => Err(Error::UnsupportedRegime(format!(
                "no acquisition-time ratio for classical {c:?} vs quantum {qb:?}"
            ))),
        };
    }
    let n = q.quantum.normalized()?;
    let mut r = finish(q, f64::NAN, n.transmission, Vec::new())?;
    r.ratio = r.inversion_ratio;
    r.warnings
        .push("no closed-form ratio for this pair; using the inversion ratio".into());
    Ok(r)
}

/// A side given in normalized variables: rho0 = 1, a0 = 1e4, near field,
/// Gaussian mask with the requested A'_T/rho0^2 (also used as the override).
pub fn normalized_side(
    kind: SourceKind,
    brightness: f64,
    omega_b_t0: f64,
    t0: f64,
    n: &Normalized,
) -> Result<Side> {
    use crate::model::{DetectorParams, GeometryParams, MaskSpec, Propagation};
    let src = crate::model::SourceParams::from_brightness(brightness, 1e4, 1.0, t0, 1e3, kind)?;
    let det = DetectorParams::new(n.eta, omega_b_t0 / t0, 0.0, 1.0 / n.rho_sq_over_a1, [0.0, 0.0])?;
    let geo = GeometryParams::new(1e-3, Propagation::NearField)?;
    let mask = MaskSpec::gaussian_with_area(n.area_over_rho_sq)?;
    let band = crate::model::band_of(omega_b_t0, &Default::default());
    let mut side = Side::new(SystemConfig::new(src, det, geo, mask)?, band);
    side.area_override = Some(n.area_over_rho_sq);
    Ok(side)
}

/// Broadband pair: |T| = 1, A'_T/rho0^2 = 1e4, Omega_B T0 = 1e-2, rho0^2/A1 = 10,
/// quantum I = 1e-3 against thermal I = 1e3.
pub fn broadband_example(eta: f64) -> Result<AcquisitionQuery> {
    let n = Normalized {
        eta,
        ..Normalized::figure_defaults(1.0, 1e-2)
    };
    Ok(AcquisitionQuery {
        classical: normalized_side(SourceKind::Thermal, 1e3, 1e-2, 1.0, &n)?,
        quantum: normalized_side(SourceKind::QuantumPhaseSensitive, 1e-3, 1e-2, 1.0, &n)?,
        target_snr: 1.0,
    })
}

/// Cross-band pair: 1 THz biphotons at I = 1e-6 against 1 MHz thermal light
/// at I = 1e3, one detector with Omega_B = 1e9 rad/s.
pub fn cross_band_example(eta: f64) -> Result<AcquisitionQuery> {
    let omega_b = 1e9;
    let (t0_q, t0_c) = (1e-12, 1e-6);
    let n = Normalized {
        eta,
        ..Normalized::figure_defaults(1.0, 1.0)
    };
    Ok(AcquisitionQuery {
        classical: normalized_side(SourceKind::Thermal, 1e3, omega_b * t0_c, t0_c, &n)?,
        quantum: normalized_side(SourceKind::QuantumPhaseSensitive, 1e-6, omega_b * t0_q, t0_q, &n)?,
        target_snr: 1.0,
    })
}
