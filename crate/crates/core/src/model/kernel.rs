use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::params::{brightness, GeometryParams, Propagation, SourceKind, SourceParams};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelKind {
    PhaseInsensitiveAuto,
    PhaseInsensitiveCross,
    PhaseSensitiveCrossClassical,
    PhaseSensitiveCrossQuantum,
}

impl KernelKind {
    pub fn is_phase_sensitive(self) -> bool {
        matches!(
            self,
            KernelKind::PhaseSensitiveCrossClassical | KernelKind::PhaseSensitiveCrossQuantum
        )
    }

    /// The cross kernel carried by a source of the given kind.
    pub fn cross_for(kind: SourceKind) -> KernelKind {
        match kind {
            SourceKind::Thermal => KernelKind::PhaseInsensitiveCross,
            SourceKind::ClassicalPhaseSensitive => KernelKind::PhaseSensitiveCrossClassical,
            SourceKind::QuantumPhaseSensitive => KernelKind::PhaseSensitiveCrossQuantum,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Plane {
    Source,
    Detection,
}

/// One Gaussian-Schell component
///
/// `amplitude * exp(-(|x1|^2+|x2|^2)/envelope^2 - |x2 -/+ x1|^2/(2 coherence^2))
///   * exp(-(t2-t1)^2/(2 duration^2))`
///
/// with the `+` sign when `inverted`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianTerm {
    pub amplitude: Complex64,
    pub envelope: f64,
    pub coherence: f64,
    pub duration: f64,
    pub inverted: bool,
}

impl GaussianTerm {
    pub fn eval(&self, x1: [f64; 2], t1: f64, x2: [f64; 2], t2: f64) -> Complex64 {
        let s = if self.inverted { 1.0 } else { -1.0 };
        let d0 = x2[0] + s * x1[0];
        let d1 = x2[1] + s * x1[1];
        let e2 = self.envelope * self.envelope;
        let arg = -(x1[0] * x1[0] + x1[1] * x1[1] + x2[0] * x2[0] + x2[1] * x2[1]) / e2
            - (d0 * d0 + d1 * d1) / (2.0 * self.coherence * self.coherence)
            - (t2 - t1).powi(2) / (2.0 * self.duration * self.duration);
        self.amplitude * arg.exp()
    }

    /// Far-field image of a source-plane component. Each Gaussian component
    /// is propagated on its own, so envelope and coherence radii swap roles and
    /// the amplitude follows from power conservation.
    fn far_field(&self, k0: f64, path_length: f64, phase_sensitive: bool) -> Self {
        let s = 2.0 * path_length / k0;
        let envelope = s / self.coherence;
        let coherence = s / self.envelope;
        Self {
            amplitude: self.amplitude * (self.envelope / envelope).powi(2),
            envelope,
            coherence,
            duration: self.duration,
            inverted: phase_sensitive,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationKernel {
    pub kind: KernelKind,
    pub params: SourceParams,
    pub plane: Plane,
    pub geometry: Option<GeometryParams>,
}

/// (2/pi)^{1/4} / sqrt(I): weight of the nonclassical term.
pub fn quantum_excess_weight(src: &SourceParams) -> f64 {
    (2.0 / PI).powf(0.25) / brightness(src).value().sqrt()
}

impl CorrelationKernel {
    pub fn new(kind: KernelKind, params: SourceParams) -> Self {
        Self {
            kind,
            params,
            plane: Plane::Source,
            geometry: None,
        }
    }

    pub fn auto(params: SourceParams) -> Self {
        Self::new(KernelKind::PhaseInsensitiveAuto, params)
    }

    pub fn cross(params: SourceParams) -> Self {
        Self::new(KernelKind::cross_for(params.kind()), params)
    }

    fn source_terms(&self) -> Vec<GaussianTerm> {
        let p = &self.params;
        let a0 = p.beam_radius();
        let r0 = p.coherence_radius();
        let t0 = p.coherence_time();
        let peak = 2.0 * p.photon_flux() / (PI * a0 * a0);
        let base = GaussianTerm {
            amplitude: Complex64::new(peak, 0.0),
            envelope: a0,
            coherence: r0,
            duration: t0,
            inverted: false,
        };
        match self.kind {
            KernelKind::PhaseSensitiveCrossQuantum => {
                let c = quantum_excess_weight(p);
                vec![
                    base,
                    GaussianTerm {
                        amplitude: Complex64::new(0.0, c * peak),
                        envelope: a0,
                        coherence: r0 / 2f64.sqrt(),
                        duration: t0 / 2f64.sqrt(),
                        inverted: false,
                    },
                ]
            }
            _ => vec![base],
        }
    }

    /// Gaussian components in the kernel's plane; the kernel is their sum.
    pub fn terms(&self) -> Vec<GaussianTerm> {
        let src = self.source_terms();
        match (self.plane, self.geometry) {
            (Plane::Detection, Some(g)) if g.regime() == Propagation::FarField => {
                let ps = self.kind.is_phase_sensitive();
                src.iter()
                    .map(|t| t.far_field(self.params.wave_number(), g.path_length(), ps))
                    .collect()
            }
            _ => src,
        }
    }

    pub fn eval(&self, x1: [f64; 2], t1: f64, x2: [f64; 2], t2: f64) -> Complex64 {
        self.terms().iter().map(|t| t.eval(x1, t1, x2, t2)).sum()
    }
}

/// Carry a source-plane kernel to the detectors. Near field leaves it unchanged.
pub fn to_detection_plane(kernel: &CorrelationKernel, geo: &GeometryParams) -> Result<CorrelationKernel> {
    match geo.regime() {
        Propagation::Intermediate => Err(Error::UnsupportedRegime(
            "no detection-plane kernels at intermediate Fresnel number".into(),
        )),
        Propagation::NearField | Propagation::FarField => Ok(CorrelationKernel {
            plane: Plane::Detection,
            geometry: Some(*geo),
            ..*kernel
        }),
    }
}

pub fn eval_kernel(kernel: &CorrelationKernel, x1: [f64; 2], t1: f64, x2: [f64; 2], t2: f64) -> Complex64 {
    kernel.eval(x1, t1, x2, t2)
}
