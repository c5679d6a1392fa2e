use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum MaskShape {
    /// Binary aperture of the given radius.
    Disk { radius: f64 },
    /// Field transmission exp(-|rho - c|^2 / w^2).
    GaussianSpot { waist: f64 },
    /// Constant transmission everywhere; only the beam envelope limits the bucket.
    Uniform { value: f64 },
}

/// Field-transmission mask T(rho), possibly offset from the optical axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskSpec {
    pub shape: MaskShape,
    pub center: [f64; 2],
}

impl MaskSpec {
    pub fn new(shape: MaskShape) -> Result<Self> {
        Self::centered_at(shape, [0.0, 0.0])
    }

    pub fn centered_at(shape: MaskShape, center: [f64; 2]) -> Result<Self> {
        match shape {
            MaskShape::Disk { radius } => require_positive("mask.radius", radius)?,
            MaskShape::GaussianSpot { waist } => require_positive("mask.waist", waist)?,
            MaskShape::Uniform { value } => {
                if !(0.0..=1.0).contains(&value) {
                    return Err(invalid("mask.value", format!("must lie in [0, 1], got {value}")));
                }
            }
        }
        if !center.iter().all(|c| c.is_finite()) {
            return Err(invalid("mask.center", "must be finite"));
        }
        Ok(Self { shape, center })
    }

    pub fn disk(radius: f64) -> Result<Self> {
        Self::new(MaskShape::Disk { radius })
    }

    pub fn gaussian(waist: f64) -> Result<Self> {
        Self::new(MaskShape::GaussianSpot { waist })
    }

    /// Gaussian spot with the requested effective area (A'_T = pi w^2 / 4).
    pub fn gaussian_with_area(area: f64) -> Result<Self> {
        require_positive("mask.area", area)?;
        Self::gaussian((4.0 * area / PI).sqrt())
    }

    /// Disk with the requested effective area (A'_T = pi R^2).
    pub fn disk_with_area(area: f64) -> Result<Self> {
        require_positive("mask.area", area)?;
        Self::disk((area / PI).sqrt())
    }

    pub fn uniform(value: f64) -> Result<Self> {
        Self::new(MaskShape::Uniform { value })
    }

    /// |T(rho)|.
    pub fn transmissivity_at(&self, rho: [f64; 2]) -> f64 {
        let dx = rho[0] - self.center[0];
        let dy = rho[1] - self.center[1];
        let r2 = dx * dx + dy * dy;
        match self.shape {
            MaskShape::Disk { radius } => {
                if r2 <= radius * radius {
                    1.0
                } else {
                    0.0
                }
            }
            MaskShape::GaussianSpot { waist } => (-r2 / (waist * waist)).exp(),
            MaskShape::Uniform { value } => value,
        }
    }

    /// |T(rho)|^2, the bucket intensity weight.
    pub fn intensity_at(&self, rho: [f64; 2]) -> f64 {
        self.transmissivity_at(rho).powi(2)
    }

    /// A'_T = integral of |T|^4. Unbounded for a nonzero uniform mask.
    pub fn effective_area(&self) -> Result<f64> {
        match self.shape {
            MaskShape::Disk { radius } => Ok(PI * radius * radius),
            MaskShape::GaussianSpot { waist } => Ok(PI * waist * waist / 4.0),
            MaskShape::Uniform { .. } => Err(invalid(
                "mask",
                "a uniform mask has no finite effective area; supply an area override",
            )),
        }
    }

    /// Integral of |T|^2.
    pub fn transmitted_area(&self) -> Result<f64> {
        match self.shape {
            MaskShape::Disk { radius } => Ok(PI * radius * radius),
            MaskShape::GaussianSpot { waist } => Ok(PI * waist * waist / 2.0),
            MaskShape::Uniform { .. } => Err(invalid("mask", "a uniform mask is unbounded")),
        }
    }

    /// Axis-aligned box outside which |T|^2 is negligible, or None when unbounded.
    pub fn support(&self) -> Option<([f64; 2], [f64; 2])> {
        let half = match self.shape {
            MaskShape::Disk { radius } => radius,
            // |T|^2 = exp(-2 r^2/w^2) < 1e-12 beyond 3.72 w
            MaskShape::GaussianSpot { waist } => 3.72 * waist,
            MaskShape::Uniform { .. } => return None,
        };
        Some((
            [self.center[0] - half, self.center[1] - half],
            [self.center[0] + half, self.center[1] + half],
        ))
    }

    /// Point reflection rho -> -rho.
    pub fn mirrored(&self) -> Self {
        Self {
            shape: self.shape,
            center: [-self.center[0], -self.center[1]],
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.shape, MaskShape::Uniform { value } if value == 0.0)
    }
}
