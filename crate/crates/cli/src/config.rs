//! JSON run configuration. Normalized aliases (I, omegaB_T0, rho0sq_over_A1,
//! AT_prime_over_rho0sq, TI_over_T0) let the standard curves be reproduced without
//! choosing SI values; lengths default to rho0 = 1, a0 = 1e4, times to T0 = 1.

use std::fmt;
use std::path::Path;

use anyhow::{Context, Result};
use ghostsnr::analytic::SnrQuery;
use ghostsnr::{
    DetectorParams, GeometryParams, MaskSpec, Propagation, SourceKind, SourceParams, SystemConfig,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Configuration mistake tied to one field; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config field `{}`: {}", self.field, self.reason)
    }
}

impl std::error::Error for ConfigError {}

fn bad(field: &str, reason: impl Into<String>) -> anyhow::Error {
    ConfigError {
        field: field.into(),
        reason: reason.into(),
    }
    .into()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    #[default]
    Thermal,
    #[serde(alias = "classical_phase_sensitive")]
    ClassicalPs,
    #[serde(alias = "quantum_ps", alias = "spdc")]
    Quantum,
}

impl From<Kind> for SourceKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Thermal => SourceKind::Thermal,
            Kind::ClassicalPs => SourceKind::ClassicalPhaseSensitive,
            Kind::Quantum => SourceKind::QuantumPhaseSensitive,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceBlock {
    pub kind: Kind,
    #[serde(rename = "P")]
    pub p: Option<f64>,
    #[serde(rename = "I")]
    pub i: Option<f64>,
    pub a0: Option<f64>,
    pub rho0: Option<f64>,
    #[serde(rename = "T0")]
    pub t0: Option<f64>,
    pub wavelength: Option<f64>,
    pub k0: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    #[default]
    Near,
    Far,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryBlock {
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub regime: Field,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorBlock {
    pub eta: Option<f64>,
    #[serde(rename = "omegaB")]
    pub omega_b: Option<f64>,
    #[serde(rename = "omegaB_T0")]
    pub omega_b_t0: Option<f64>,
    #[serde(rename = "omegaN")]
    pub omega_n: Option<f64>,
    #[serde(rename = "A1")]
    pub a1: Option<f64>,
    #[serde(rename = "rho0sq_over_A1")]
    pub rho_sq_over_a1: Option<f64>,
    pub rho1: Option<[f64; 2]>,
    /// Charge per photoelectron; the SNR does not depend on it.
    pub q: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Disk,
    Gaussian,
    Uniform,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaskBlock {
    pub shape: Option<Shape>,
    /// Disk radius, Gaussian waist, or the uniform transmission value.
    pub size: Option<f64>,
    pub center: Option<[f64; 2]>,
    #[serde(rename = "AT_prime_over_rho0sq")]
    pub area_over_rho_sq: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrelatorBlock {
    #[serde(rename = "TI")]
    pub ti: Option<f64>,
    #[serde(rename = "TI_over_T0")]
    pub ti_over_t0: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    /// Dotted config path, e.g. "source.I".
    pub variable: String,
    pub from: f64,
    pub to: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_points() -> usize {
    200
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    pub csv: Option<String>,
    pub svg: Option<String>,
    pub json: bool,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub source: SourceBlock,
    pub geometry: GeometryBlock,
    pub detector: DetectorBlock,
    pub mask: MaskBlock,
    pub correlator: CorrelatorBlock,
    pub sweep: Option<SweepBlock>,
    pub output: OutputBlock,
}

/// A validated configuration: the physical system plus the bits that sit
/// outside it.
#[derive(Clone, Debug)]
pub struct Built {
    pub system: SystemConfig,
    /// T_I if the correlator block gave one.
    pub averaging_time: Option<f64>,
    pub area_override: Option<f64>,
}

impl Built {
    pub fn t0(&self) -> f64 {
        self.system.source.coherence_time()
    }

    /// T_I, or `default_over_t0` coherence times.
    pub fn ti_or(&self, default_over_t0: f64) -> f64 {
        self.averaging_time.unwrap_or(default_over_t0 * self.t0())
    }

    pub fn query(&self, ti: f64) -> Result<SnrQuery> {
        let mut q = SnrQuery::new(self.system, ti)?;
        if let Some(m) = self.area_override {
            q = q.with_area_override(m)?;
        }
        Ok(q)
    }
}

fn one_of(a: (&str, Option<f64>), b: (&str, Option<f64>)) -> Result<Option<(bool, f64)>> {
    match (a.1, b.1) {
        (Some(_), Some(_)) => Err(bad(a.0, format!("give either {} or {}, not both", a.0, b.0))),
        (Some(x), None) => Ok(Some((true, x))),
        (None, Some(y)) => Ok(Some((false, y))),
        (None, None) => Ok(None),
    }
}

/// Turn a field-level error from the model into a config error.
fn lift(e: ghostsnr::Error) -> anyhow::Error {
    match e {
        ghostsnr::Error::InvalidParameter { field, reason } => bad(field, reason),
        e => e.into(),
    }
}

impl RunConfig {
    pub fn from_value(v: Value) -> Result<Self> {
        serde_json::from_value(v).map_err(|e| bad("<root>", e.to_string()))
    }

    pub fn build(&self) -> Result<Built> {
        let s = &self.source;
        let kind: SourceKind = s.kind.into();
        let rho0 = s.rho0.unwrap_or(1.0);
        let a0 = s.a0.unwrap_or(1e4);
        let t0 = s.t0.unwrap_or(1.0);
        let k0 = match one_of(("source.wavelength", s.wavelength), ("source.k0", s.k0))? {
            Some((true, lambda)) => SourceParams::wave_number_from_wavelength(lambda).map_err(lift)?,
            Some((false, k)) => k,
            None => 1e3,
        };
        let src = match one_of(("source.P", s.p), ("source.I", s.i))? {
            Some((true, p)) => SourceParams::new(p, a0, rho0, t0, k0, kind),
            Some((false, i)) => SourceParams::from_brightness(i, a0, rho0, t0, k0, kind),
            None => return Err(bad("source.I", "one of source.P or source.I is required")),
        }
        .map_err(lift)?;

        let regime = match self.geometry.regime {
            Field::Near => Propagation::NearField,
            Field::Far => Propagation::FarField,
        };
        // defaults deep inside the declared regime
        let l = self.geometry.l.unwrap_or(match regime {
            Propagation::FarField => 50.0 * k0 * a0 * a0,
            _ => 1e-3 * k0 * rho0 * rho0,
        });
        let geo = GeometryParams::new(l, regime).map_err(lift)?;
        let (_, rho) = geo.plane_radii(&src).map_err(lift)?;

        let d = &self.detector;
        let eta = d
            .eta
            .ok_or_else(|| bad("detector.eta", "detector.eta is required (quantum efficiency in (0, 1])"))?;
        let omega_b = match one_of(("detector.omegaB", d.omega_b), ("detector.omegaB_T0", d.omega_b_t0))? {
            Some((true, w)) => w,
            Some((false, b)) => b / t0,
            None => return Err(bad("detector.omegaB_T0", "one of detector.omegaB or detector.omegaB_T0 is required")),
        };
        let a1 = match one_of(("detector.A1", d.a1), ("detector.rho0sq_over_A1", d.rho_sq_over_a1))? {
            Some((true, a)) => a,
            Some((false, r)) => {
                if !(r > 0.0) {
                    return Err(bad("detector.rho0sq_over_A1", format!("must be > 0, got {r}")));
                }
                rho * rho / r
            }
            None => return Err(bad("detector.rho0sq_over_A1", "one of detector.A1 or detector.rho0sq_over_A1 is required")),
        };
        let mut det = DetectorParams::new(eta, omega_b, d.omega_n.unwrap_or(0.0), a1, d.rho1.unwrap_or([0.0; 2]))
            .map_err(lift)?;
        if let Some(q) = d.q {
            det = det.with_charge(q).map_err(lift)?;
        }

        let m = &self.mask;
        let area_override = m.area_over_rho_sq;
        let center = m.center.unwrap_or([0.0; 2]);
        let mask = match (m.shape, m.size, area_override) {
            (Some(shape), Some(size), _) => {
                let shape = match shape {
                    Shape::Disk => ghostsnr::MaskShape::Disk { radius: size },
                    Shape::Gaussian => ghostsnr::MaskShape::GaussianSpot { waist: size },
                    Shape::Uniform => ghostsnr::MaskShape::Uniform { value: size },
                };
                MaskSpec::centered_at(shape, center)
            }
            (Some(Shape::Uniform), None, _) => MaskSpec::uniform(1.0),
            (Some(Shape::Disk), None, Some(ma)) => MaskSpec::disk_with_area(ma * rho * rho)
                .and_then(|k| MaskSpec::centered_at(k.shape, center)),
            (Some(Shape::Gaussian) | None, None, Some(ma)) => MaskSpec::gaussian_with_area(ma * rho * rho)
                .and_then(|k| MaskSpec::centered_at(k.shape, center)),
            (Some(_), None, None) => return Err(bad("mask.size", "disk and gaussian masks need mask.size or mask.AT_prime_over_rho0sq")),
            (None, Some(_), _) => return Err(bad("mask.shape", "mask.size given without mask.shape")),
            (None, None, None) => MaskSpec::uniform(1.0),
        }
        .map_err(lift)?;

        let system = SystemConfig::new(src, det, geo, mask).map_err(lift)?;
        let averaging_time = match one_of(("correlator.TI", self.correlator.ti), ("correlator.TI_over_T0", self.correlator.ti_over_t0))? {
            Some((true, ti)) => Some(ti),
            Some((false, x)) => Some(x * t0),
            None => None,
        };
        if let Some(ti) = averaging_time {
            if !(ti > 0.0 && ti.is_finite()) {
                return Err(bad("correlator.TI", format!("must be finite and > 0, got {ti}")));
            }
        }
        Ok(Built {
            system,
            averaging_time,
            area_override,
        })
    }
}

/// Read a JSON file (or start from `{}`) and apply `key=value` overrides.
pub fn load_value(path: Option<&Path>, sets: &[String]) -> Result<Value> {
    let mut v = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).map_err(|e| bad("<file>", format!("{}: {e}", p.display())))?
        }
        None => Value::Object(Default::default()),
    };
    for s in sets {
        let (k, val) = s
            .split_once('=')
            .ok_or_else(|| bad(s, "overrides take the form key=value"))?;
        let parsed = serde_json::from_str(val).unwrap_or_else(|_| Value::String(val.to_string()));
        set_path(&mut v, k, parsed)?;
    }
    Ok(v)
}

/// Set a dotted path, creating objects along the way.
pub fn set_path(v: &mut Value, path: &str, val: Value) -> Result<()> {
    let mut cur = v;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| bad(path, "path runs through a non-object"))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), val);
            return Ok(());
        }
        cur = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

/// Log-spaced points from `from` to `to` inclusive.
pub fn log_space(from: f64, to: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![from];
    }
    let (a, b) = (from.log10(), to.log10());
    (0..n)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn fig2a_point() -> Value {
        json!({
            "source": {"kind": "thermal", "I": 100.0},
            "detector": {"eta": 0.9, "omegaB_T0": 10.0, "rho0sq_over_A1": 10.0},
            "mask": {"AT_prime_over_rho0sq": 1e4},
            "correlator": {"TI_over_T0": 1.0}
        })
    }

    #[test]
    fn normalized_aliases_reach_the_formulas() {
        let b = RunConfig::from_value(fig2a_point()).unwrap().build().unwrap();
        let n = b.query(b.ti_or(1.0)).unwrap().normalized().unwrap();
        assert!((n.brightness / 100.0 - 1.0).abs() < 1e-12);
        assert!((n.omega_b_t0 / 10.0 - 1.0).abs() < 1e-12);
        assert!((n.rho_sq_over_a1 / 10.0 - 1.0).abs() < 1e-12);
        assert_eq!(n.area_over_rho_sq, 1e4);
        assert_eq!(n.transmission, 1.0);
    }

    #[test]
    fn far_field_alias_uses_detection_plane_radius() {
        let mut v = fig2a_point();
        set_path(&mut v, "geometry.regime", json!("far")).unwrap();
        set_path(&mut v, "source.kind", json!("quantum")).unwrap();
        let b = RunConfig::from_value(v).unwrap().build().unwrap();
        let n = b.query(1.0).unwrap().normalized().unwrap();
        assert!((n.rho_sq_over_a1 / 10.0 - 1.0).abs() < 1e-9);
        assert_eq!(b.system.regime().propagation, Propagation::FarField);
    }

    #[test]
    fn missing_eta_names_the_field() {
        let mut v = fig2a_point();
        v["detector"].as_object_mut().unwrap().remove("eta");
        let e = RunConfig::from_value(v).unwrap().build().unwrap_err();
        assert!(e.to_string().contains("detector.eta"), "{e}");
        assert!(e.downcast_ref::<ConfigError>().is_some());
    }

    #[test]
    fn both_halves_of_an_alias_pair_rejected() {
        let mut v = fig2a_point();
        set_path(&mut v, "source.P", json!(1e6)).unwrap();
        let e = RunConfig::from_value(v).unwrap().build().unwrap_err();
        assert!(e.to_string().contains("source.P"), "{e}");
    }

    #[test]
    fn unknown_field_rejected() {
        let mut v = fig2a_point();
        set_path(&mut v, "detector.etta", json!(0.5)).unwrap();
        assert!(RunConfig::from_value(v).is_err());
    }

    #[test]
    fn overrides_parse_json_or_fall_back_to_strings() {
        let v = load_value(None, &["source.I=3".into(), "geometry.regime=far".into()]).unwrap();
        assert_eq!(v["source"]["I"], json!(3));
        assert_eq!(v["geometry"]["regime"], json!("far"));
    }

    #[test]
    fn log_space_hits_both_ends() {
        let x = log_space(1e-8, 1e8, 200);
        assert_eq!(x.len(), 200);
        assert!((x[0] / 1e-8 - 1.0).abs() < 1e-12);
        assert!((x[199] / 1e8 - 1.0).abs() < 1e-12);
    }
}
