use serde::{Deserialize, Serialize};

use super::params::{DetectorParams, GeometryParams, Propagation, SourceParams, Thresholds};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Band {
    Narrowband,
    Broadband,
    Intermediate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub propagation: Propagation,
    pub band: Band,
    /// k0 rho0 a0 / 2L for thermal light, k0 rho0^2 / 2L for phase-sensitive light.
    pub near_field_number: f64,
    /// k0 rho0 a0 / 2L for thermal light, k0 a0^2 / 2L for phase-sensitive light.
    pub far_field_number: f64,
    pub omega_b_t0: f64,
}

pub(crate) fn fresnel_numbers(src: &SourceParams, path_length: f64) -> (f64, f64) {
    let k = src.wave_number();
    let (a0, r0) = (src.beam_radius(), src.coherence_radius());
    let twol = 2.0 * path_length;
    if src.kind().is_phase_sensitive() {
        (k * r0 * r0 / twol, k * a0 * a0 / twol)
    } else {
        let f = k * r0 * a0 / twol;
        (f, f)
    }
}

pub(crate) fn propagation_regime(src: &SourceParams, path_length: f64, th: &Thresholds) -> Propagation {
    let (near, far) = fresnel_numbers(src, path_length);
    if near >= th.much_greater {
        Propagation::NearField
    } else if far <= th.much_less() {
        Propagation::FarField
    } else {
        Propagation::Intermediate
    }
}

pub fn band_of(omega_b_t0: f64, th: &Thresholds) -> Band {
    if omega_b_t0 >= th.much_greater {
        Band::Narrowband
    } else if omega_b_t0 <= th.much_less() {
        Band::Broadband
    } else {
        Band::Intermediate
    }
}

/// Classify from the physical numbers; the regime declared in `geo` is ignored.
pub fn classify_regime(src: &SourceParams, geo: &GeometryParams, det: &DetectorParams) -> RegimeReport {
    classify_with(src, geo, det, &Thresholds::default())
}

pub fn classify_with(
    src: &SourceParams,
    geo: &GeometryParams,
    det: &DetectorParams,
    th: &Thresholds,
) -> RegimeReport {
    let (near, far) = fresnel_numbers(src, geo.path_length());
    let bt = det.omega_b() * src.coherence_time();
    RegimeReport {
        propagation: propagation_regime(src, geo.path_length(), th),
        band: band_of(bt, th),
        near_field_number: near,
        far_field_number: far,
        omega_b_t0: bt,
    }
}
