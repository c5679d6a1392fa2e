//! Physical parameters, correlation kernels and regime bookkeeping.

mod kernel;
mod mask;
mod params;
mod regime;

pub use kernel::{
    eval_kernel, quantum_excess_weight, to_detection_plane, CorrelationKernel, GaussianTerm,
    KernelKind, Plane,
};
pub use mask::{MaskShape, MaskSpec};
pub use params::{
    brightness, Brightness, DetectorParams, GeometryParams, Propagation, SourceKind, SourceParams,
    Thresholds, ELECTRON_CHARGE,
};
pub use regime::{band_of, classify_regime, classify_with, Band, RegimeReport};

use crate::error::Result;

/// Everything that fixes the ghost-imaging setup apart from the averaging time.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SystemConfig {
    pub source: SourceParams,
    pub detector: DetectorParams,
    pub geometry: GeometryParams,
    pub mask: MaskSpec,
}

impl SystemConfig {
    pub fn new(
        source: SourceParams,
        detector: DetectorParams,
        geometry: GeometryParams,
        mask: MaskSpec,
    ) -> Result<Self> {
        detector.check_against(&source, &Thresholds::default())?;
        Ok(Self {
            source,
            detector,
            geometry,
            mask,
        })
    }

    /// Mask as seen by the bucket: mirrored for phase-sensitive light in the far field,
    /// where the image is inverted.
    pub fn image_inverted(&self) -> bool {
        self.source.kind().is_phase_sensitive() && self.geometry.regime() == Propagation::FarField
    }

    /// Point at which the mask is read for the closed forms: rho1, or -rho1 when inverted.
    pub fn eval_point(&self) -> [f64; 2] {
        let r = self.detector.pinhole_pos();
        if self.image_inverted() {
            [-r[0], -r[1]]
        } else {
            r
        }
    }

    pub fn auto_kernel(&self) -> Result<CorrelationKernel> {
        to_detection_plane(&CorrelationKernel::auto(self.source), &self.geometry)
    }

    pub fn cross_kernel(&self) -> Result<CorrelationKernel> {
        to_detection_plane(&CorrelationKernel::cross(self.source), &self.geometry)
    }

    pub fn regime(&self) -> RegimeReport {
        classify_regime(&self.source, &self.geometry, &self.detector)
    }

    pub fn with_source(mut self, source: SourceParams) -> Self {
        self.source = source;
        self
    }
}
