use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Result};

/// Elementary charge, C.
pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;

/// Numeric reading of "much greater" / "much less" and the other
/// asymptotic side conditions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// A quantity counts as "much greater than one" at or above this value.
    pub much_greater: f64,
    /// Largest allowed rho0/a0.
    pub coherence_ratio: f64,
    /// Largest allowed omega_N/omega_B and omega_N*T0.
    pub notch_ratio: f64,
    /// T_I must exceed this multiple of max(T0, 1/omega_B).
    pub averaging_factor: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            much_greater: 10.0,
            coherence_ratio: 0.1,
            notch_ratio: 0.1,
            averaging_factor: 100.0,
        }
    }
}

impl Thresholds {
    /// Same guards at a different "much greater" factor.
    pub fn with_factor(factor: f64) -> Self {
        Self {
            much_greater: factor,
            ..Self::default()
        }
    }

    pub fn much_less(&self) -> f64 {
        1.0 / self.much_greater
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SourceKind {
    Thermal,
    ClassicalPhaseSensitive,
    QuantumPhaseSensitive,
}

impl SourceKind {
    pub fn is_phase_sensitive(self) -> bool {
        !matches!(self, SourceKind::Thermal)
    }

    pub fn is_classical(self) -> bool {
        !matches!(self, SourceKind::QuantumPhaseSensitive)
    }
}

/// Gaussian-Schell source: flux, beam radius, coherence radius and time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceParams {
    photon_flux: f64,
    beam_radius: f64,
    coherence_radius: f64,
    coherence_time: f64,
    wave_number: f64,
    kind: SourceKind,
}

impl SourceParams {
    pub fn new(
        photon_flux: f64,
        beam_radius: f64,
        coherence_radius: f64,
        coherence_time: f64,
        wave_number: f64,
        kind: SourceKind,
    ) -> Result<Self> {
        Self::with_thresholds(
            photon_flux,
            beam_radius,
            coherence_radius,
            coherence_time,
            wave_number,
            kind,
            &Thresholds::default(),
        )
    }

    pub fn with_thresholds(
        photon_flux: f64,
        beam_radius: f64,
        coherence_radius: f64,
        coherence_time: f64,
        wave_number: f64,
        kind: SourceKind,
        th: &Thresholds,
    ) -> Result<Self> {
        require_positive("source.P", photon_flux)?;
        require_positive("source.a0", beam_radius)?;
        require_positive("source.rho0", coherence_radius)?;
        require_positive("source.T0", coherence_time)?;
        require_positive("source.k0", wave_number)?;
        if coherence_radius / beam_radius > th.coherence_ratio {
            return Err(invalid(
                "source.rho0",
                format!(
                    "rho0/a0 = {:.3e} exceeds {:.3e}; the model needs rho0 << a0",
                    coherence_radius / beam_radius,
                    th.coherence_ratio
                ),
            ));
        }
        Ok(Self {
            photon_flux,
            beam_radius,
            coherence_radius,
            coherence_time,
            wave_number,
            kind,
        })
    }

    /// Build from brightness instead of flux: P = I a0^2 / (T0 rho0^2).
    pub fn from_brightness(
        brightness: f64,
        beam_radius: f64,
        coherence_radius: f64,
        coherence_time: f64,
        wave_number: f64,
        kind: SourceKind,
    ) -> Result<Self> {
        require_positive("source.I", brightness)?;
        require_positive("source.rho0", coherence_radius)?;
        require_positive("source.T0", coherence_time)?;
        let p = brightness * beam_radius * beam_radius
            / (coherence_time * coherence_radius * coherence_radius);
        Self::new(p, beam_radius, coherence_radius, coherence_time, wave_number, kind)
    }

    pub fn photon_flux(&self) -> f64 {
        self.photon_flux
    }
    pub fn beam_radius(&self) -> f64 {
        self.beam_radius
    }
    pub fn coherence_radius(&self) -> f64 {
        self.coherence_radius
    }
    pub fn coherence_time(&self) -> f64 {
        self.coherence_time
    }
    pub fn wave_number(&self) -> f64 {
        self.wave_number
    }
    pub fn kind(&self) -> SourceKind {
        self.kind
    }

    pub fn with_kind(mut self, kind: SourceKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_photon_flux(mut self, p: f64) -> Result<Self> {
        require_positive("source.P", p)?;
        self.photon_flux = p;
        Ok(self)
    }

    pub fn with_brightness(self, brightness: f64) -> Result<Self> {
        require_positive("source.I", brightness)?;
        let p = brightness * self.beam_radius.powi(2)
            / (self.coherence_time * self.coherence_radius.powi(2));
        self.with_photon_flux(p)
    }

    /// Wave number from vacuum wavelength.
    pub fn wave_number_from_wavelength(lambda: f64) -> Result<f64> {
        require_positive("source.wavelength", lambda)?;
        Ok(2.0 * std::f64::consts::PI / lambda)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    eta: f64,
    omega_b: f64,
    omega_n: f64,
    pinhole_area: f64,
    pinhole_pos: [f64; 2],
    charge: f64,
}

impl DetectorParams {
    pub fn new(
        eta: f64,
        omega_b: f64,
        omega_n: f64,
        pinhole_area: f64,
        pinhole_pos: [f64; 2],
    ) -> Result<Self> {
        Self::with_thresholds(
            eta,
            omega_b,
            omega_n,
            pinhole_area,
            pinhole_pos,
            &Thresholds::default(),
        )
    }

    pub fn with_thresholds(
        eta: f64,
        omega_b: f64,
        omega_n: f64,
        pinhole_area: f64,
        pinhole_pos: [f64; 2],
        th: &Thresholds,
    ) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(invalid("detector.eta", format!("must lie in (0, 1], got {eta}")));
        }
        require_positive("detector.omegaB", omega_b)?;
        if !(omega_n.is_finite() && omega_n >= 0.0) {
            return Err(invalid("detector.omegaN", format!("must be >= 0, got {omega_n}")));
        }
        if omega_n > th.notch_ratio * omega_b {
            return Err(invalid(
                "detector.omegaN",
                format!(
                    "omegaN/omegaB = {:.3e} exceeds {:.3e}",
                    omega_n / omega_b,
                    th.notch_ratio
                ),
            ));
        }
        require_positive("detector.A1", pinhole_area)?;
        if !pinhole_pos.iter().all(|v| v.is_finite()) {
            return Err(invalid("detector.rho1", "must be finite"));
        }
        Ok(Self {
            eta,
            omega_b,
            omega_n,
            pinhole_area,
            pinhole_pos,
            charge: ELECTRON_CHARGE,
        })
    }

    pub fn with_charge(mut self, q: f64) -> Result<Self> {
        require_positive("detector.q", q)?;
        self.charge = q;
        Ok(self)
    }

    pub fn with_omega_n(self, omega_n: f64) -> Result<Self> {
        Self::new(
            self.eta,
            self.omega_b,
            omega_n,
            self.pinhole_area,
            self.pinhole_pos,
        )
        .and_then(|d| d.with_charge(self.charge))
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn omega_b(&self) -> f64 {
        self.omega_b
    }
    pub fn omega_n(&self) -> f64 {
        self.omega_n
    }
    pub fn pinhole_area(&self) -> f64 {
        self.pinhole_area
    }
    pub fn pinhole_pos(&self) -> [f64; 2] {
        self.pinhole_pos
    }
    pub fn charge(&self) -> f64 {
        self.charge
    }

    /// Pairing-dependent check: the notch must be narrow against 1/T0 as well.
    pub fn check_against(&self, src: &SourceParams, th: &Thresholds) -> Result<()> {
        let x = self.omega_n * src.coherence_time();
        if x > th.notch_ratio {
            return Err(invalid(
                "detector.omegaN",
                format!("omegaN*T0 = {x:.3e} exceeds {:.3e}", th.notch_ratio),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Propagation {
    NearField,
    FarField,
    Intermediate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams {
    path_length: f64,
    regime: Propagation,
}

impl GeometryParams {
    /// Geometry with an explicitly declared regime.
    pub fn new(path_length: f64, regime: Propagation) -> Result<Self> {
        require_positive("geometry.L", path_length)?;
        Ok(Self {
            path_length,
            regime,
        })
    }

    /// Geometry whose regime is read off the Fresnel numbers of `src`.
    pub fn classified(path_length: f64, src: &SourceParams) -> Result<Self> {
        require_positive("geometry.L", path_length)?;
        let regime = super::regime::propagation_regime(src, path_length, &Thresholds::default());
        Ok(Self {
            path_length,
            regime,
        })
    }

    pub fn path_length(&self) -> f64 {
        self.path_length
    }
    pub fn regime(&self) -> Propagation {
        self.regime
    }

    /// (a_L, rho_L) = (2L/(k0 rho0), 2L/(k0 a0)).
    pub fn far_field_radii(&self, src: &SourceParams) -> (f64, f64) {
        let s = 2.0 * self.path_length / src.wave_number();
        (s / src.coherence_radius(), s / src.beam_radius())
    }

    /// Envelope and coherence radii of the classical kernels at the detectors.
    pub fn plane_radii(&self, src: &SourceParams) -> crate::Result<(f64, f64)> {
        match self.regime {
            Propagation::NearField => Ok((src.beam_radius(), src.coherence_radius())),
            Propagation::FarField => Ok(self.far_field_radii(src)),
            Propagation::Intermediate => Err(crate::Error::UnsupportedRegime(
                "no detection-plane kernels at intermediate Fresnel number".into(),
            )),
        }
    }
}

/// Photons per spatiotemporal mode.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Brightness(pub f64);

impl Brightness {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn brightness(src: &SourceParams) -> Brightness {
    let r = src.coherence_radius() / src.beam_radius();
    Brightness(src.photon_flux() * src.coherence_time() * r * r)
}
