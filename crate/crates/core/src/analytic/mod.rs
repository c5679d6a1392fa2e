//! Closed-form SNR for the thermal, classical phase-sensitive and quantum
//! phase-sensitive sources, with the regime guards they rely on.

pub mod formulas;
mod optimum;

pub use formulas::{Breakdown, Cell, Normalized, NoiseTerm};
pub use optimum::{grid_argmax, optimal_brightness, optimal_brightness_normalized, Optimum, OptimumMethod, SCAN_RANGE};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{
    band_of, brightness, classify_with, Band, Propagation, RegimeReport, SourceKind, SystemConfig,
    Thresholds,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnrQuery {
    pub system: SystemConfig,
    /// T_I, s.
    pub averaging_time: f64,
    /// Where |T| is read; defaults to rho1, or -rho1 for an inverted image.
    pub eval_point: Option<[f64; 2]>,
    /// Replaces A'_T/rho^2 computed from the mask.
    pub area_override: Option<f64>,
    pub thresholds: Thresholds,
}

impl SnrQuery {
    pub fn new(system: SystemConfig, averaging_time: f64) -> Result<Self> {
        crate::error::require_positive("correlator.TI", averaging_time)?;
        Ok(Self {
            system,
            averaging_time,
            eval_point: None,
            area_override: None,
            thresholds: Thresholds::default(),
        })
    }

    pub fn with_area_override(mut self, area_over_rho_sq: f64) -> Result<Self> {
        crate::error::require_positive("mask.AT_prime_over_rho0sq", area_over_rho_sq)?;
        self.area_override = Some(area_over_rho_sq);
        Ok(self)
    }

    pub fn eval_point(&self) -> [f64; 2] {
        self.eval_point.unwrap_or_else(|| self.system.eval_point())
    }

    /// Convert to the dimensionless inputs of the formulas.
    pub fn normalized(&self) -> Result<Normalized> {
        let s = &self.system;
        let (_, rho) = s.geometry.plane_radii(&s.source)?;
        let rho2 = rho * rho;
        let area_over_rho_sq = match self.area_override {
            Some(m) => m,
            None => s.mask.effective_area()? / rho2,
        };
        let t0 = s.source.coherence_time();
        Ok(Normalized {
            brightness: brightness(&s.source).value(),
            omega_b_t0: s.detector.omega_b() * t0,
            rho_sq_over_a1: rho2 / s.detector.pinhole_area(),
            area_over_rho_sq,
            eta: s.detector.eta(),
            transmission: s.mask.transmissivity_at(self.eval_point()),
            ti_over_t0: self.averaging_time / t0,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SnrWarning {
    /// Formula requires a band the parameters are not in.
    Band { required: Band, omega_b_t0: f64 },
    /// Declared propagation regime disagrees with the Fresnel numbers.
    Propagation {
        declared: Propagation,
        classified: Propagation,
    },
    /// Mask too small for the formula (A'_T/rho^2 below the guard).
    MaskArea { area_over_rho_sq: f64, required: f64 },
    /// Pinhole not small against the coherence area.
    Pinhole { rho_sq_over_a1: f64, required: f64 },
    /// T_I not long against T0 or 1/Omega_B.
    Averaging { ti_over_t0: f64, omega_b_ti: f64, required: f64 },
    /// Formula intended for another source kind.
    SourceKind { expected: String, got: SourceKind },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Asymptotes {
    pub low_brightness: f64,
    pub high_brightness: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnrResult {
    pub cell: Cell,
    pub snr: f64,
    /// SNR * T0 / T_I.
    pub snr_normalized: f64,
    pub numerator: f64,
    pub noise_terms: Vec<NoiseTerm>,
    pub dominant: String,
    pub asymptotes: Asymptotes,
    pub regime: RegimeReport,
    pub inputs: Normalized,
    pub warnings: Vec<SnrWarning>,
}

impl SnrResult {
    fn assemble(cell: Cell, n: Normalized, regime: RegimeReport, warnings: Vec<SnrWarning>) -> Self {
        let b = formulas::evaluate(cell, &n);
        let snr = b.snr();
        Self {
            cell,
            snr,
            snr_normalized: snr / n.ti_over_t0,
            numerator: b.numerator,
            dominant: b.dominant().to_string(),
            noise_terms: b.terms,
            asymptotes: Asymptotes {
                low_brightness: b.low_brightness,
                high_brightness: b.high_brightness,
            },
            regime,
            inputs: n,
            warnings,
        }
    }
}

fn check_eta(n: &Normalized) -> Result<()> {
    if !(n.eta > 0.0 && n.eta <= 1.0) {
        return Err(invalid("detector.eta", "must lie in (0, 1]"));
    }
    Ok(())
}

fn guards(q: &SnrQuery, cell: Cell, n: &Normalized) -> (RegimeReport, Vec<SnrWarning>) {
    let th = &q.thresholds;
    let s = &q.system;
    let regime = classify_with(&s.source, &s.geometry, &s.detector, th);
    let mut w = Vec::new();

    let band = band_of(n.omega_b_t0, th);
    let required_band = if cell.is_narrowband() {
        Band::Narrowband
    } else {
        Band::Broadband
    };
    if band != required_band {
        w.push(SnrWarning::Band {
            required: required_band,
            omega_b_t0: n.omega_b_t0,
        });
    }
    if regime.propagation != s.geometry.regime() {
        w.push(SnrWarning::Propagation {
            declared: s.geometry.regime(),
            classified: regime.propagation,
        });
    }
    // Mask guards: A'_T/rho^2 >> 30 (narrowband), >> 12 Omega_B T0 (broadband).
    let required = if cell.is_narrowband() {
        30.0 * th.much_greater
    } else {
        12.0 * n.omega_b_t0 * th.much_greater
    };
    if n.area_over_rho_sq < required {
        w.push(SnrWarning::MaskArea {
            area_over_rho_sq: n.area_over_rho_sq,
            required,
        });
    }
    if n.rho_sq_over_a1 < th.much_greater {
        w.push(SnrWarning::Pinhole {
            rho_sq_over_a1: n.rho_sq_over_a1,
            required: th.much_greater,
        });
    }
    let bti = n.omega_b_t0 * n.ti_over_t0;
    if n.ti_over_t0 < th.averaging_factor || bti < th.averaging_factor {
        w.push(SnrWarning::Averaging {
            ti_over_t0: n.ti_over_t0,
            omega_b_ti: bti,
            required: th.averaging_factor,
        });
    }
    let kind = s.source.kind();
    if cell.is_quantum() != (kind == SourceKind::QuantumPhaseSensitive) {
        w.push(SnrWarning::SourceKind {
            expected: if cell.is_quantum() {
                "QuantumPhaseSensitive".into()
            } else {
                "Thermal or ClassicalPhaseSensitive".into()
            },
            got: kind,
        });
    }
    (regime, w)
}

fn run(q: &SnrQuery, cell: Cell) -> Result<SnrResult> {
    let n = q.normalized()?;
    check_eta(&n)?;
    let (regime, warnings) = guards(q, cell, &n);
    Ok(SnrResult::assemble(cell, n, regime, warnings))
}

/// Thermal source, Omega_B T0 >> 1. In the far field the detection-plane radii
/// are used automatically.
pub fn snr_thermal_narrowband(q: &SnrQuery) -> Result<SnrResult> {
    run(q, Cell::ThermalNarrowband)
}

pub fn snr_thermal_broadband(q: &SnrQuery) -> Result<SnrResult> {
    run(q, Cell::ThermalBroadband)
}

/// Classical phase-sensitive light shares the thermal expressions; in the far
/// field they are read with |T(-rho1)|.
pub fn snr_classical_ps(q: &SnrQuery) -> Result<SnrResult> {
    if q.system.source.kind() != SourceKind::ClassicalPhaseSensitive {
        return Err(Error::UnsupportedState(format!(
            "snr_classical_ps needs a ClassicalPhaseSensitive source, got {:?}",
            q.system.source.kind()
        )));
    }
    let n = q.normalized()?;
    if n.omega_b_t0 >= 1.0 {
        snr_thermal_narrowband(q)
    } else {
        snr_thermal_broadband(q)
    }
}

fn require_regime(q: &SnrQuery, want: Propagation) -> Result<()> {
    let got = q.system.geometry.regime();
    if got != want {
        return Err(Error::UnsupportedRegime(format!(
            "formula is for {want:?}, geometry declares {got:?}"
        )));
    }
    Ok(())
}

pub fn snr_quantum_narrowband_near(q: &SnrQuery) -> Result<SnrResult> {
    require_regime(q, Propagation::NearField)?;
    run(q, Cell::QuantumNarrowbandNear)
}

pub fn snr_quantum_broadband_near(q: &SnrQuery) -> Result<SnrResult> {
    require_regime(q, Propagation::NearField)?;
    run(q, Cell::QuantumBroadbandNear)
}

pub fn snr_quantum_narrowband_far(q: &SnrQuery) -> Result<SnrResult> {
    require_regime(q, Propagation::FarField)?;
    run(q, Cell::QuantumNarrowbandFar)
}

pub fn snr_quantum_broadband_far(q: &SnrQuery) -> Result<SnrResult> {
    require_regime(q, Propagation::FarField)?;
    run(q, Cell::QuantumBroadbandFar)
}

/// The closed-form cell that applies to for this configuration. Between the
/// two band limits the nearer one (by Omega_B T0 against 1) is chosen; the
/// band warning then flags it.
pub fn select_cell(q: &SnrQuery) -> Result<Cell> {
    let n = q.normalized()?;
    let narrow = n.omega_b_t0 >= 1.0;
    let far = match q.system.geometry.regime() {
        Propagation::NearField => false,
        Propagation::FarField => true,
        Propagation::Intermediate => {
            return Err(Error::UnsupportedRegime(
                "no closed form at intermediate Fresnel number".into(),
            ))
        }
    };
    Ok(match (q.system.source.kind(), narrow, far) {
        (SourceKind::QuantumPhaseSensitive, true, false) => Cell::QuantumNarrowbandNear,
        (SourceKind::QuantumPhaseSensitive, false, false) => Cell::QuantumBroadbandNear,
        (SourceKind::QuantumPhaseSensitive, true, true) => Cell::QuantumNarrowbandFar,
        (SourceKind::QuantumPhaseSensitive, false, true) => Cell::QuantumBroadbandFar,
        (_, true, _) => Cell::ThermalNarrowband,
        (_, false, _) => Cell::ThermalBroadband,
    })
}

/// Dispatch to the matching closed form.
pub fn snr(q: &SnrQuery) -> Result<SnrResult> {
    let cell = select_cell(q)?;
    run(q, cell)
}
