//! Signal-to-noise analysis for ghost imaging with Gaussian-state light.
//!
//! Three independent routes to the same number:
//!
//! * [`analytic`] evaluates the closed-form SNR expressions and their asymptotes,
//! * [`wick`] builds the photocurrent fourth moment from second-order kernels
//!   by Gaussian moment factoring and integrates it numerically,
//! * [`mc`] simulates speckle, shot noise and AC-coupled detection for the
//!   two classical states.
//!
//! [`acquisition`] turns the closed forms into classical-vs-quantum averaging
//! time comparisons.

pub mod acquisition;
pub mod analytic;
pub mod error;
pub mod mc;
pub mod model;
pub mod poly;
pub mod quadrature;
pub mod wick;

pub use error::{Error, Result};
pub use model::{
    brightness, classify_regime, to_detection_plane, Band, Brightness, CorrelationKernel,
    DetectorParams, GeometryParams, KernelKind, MaskShape, MaskSpec, Plane, Propagation,
    RegimeReport, SourceKind, SourceParams, SystemConfig, Thresholds,
};
