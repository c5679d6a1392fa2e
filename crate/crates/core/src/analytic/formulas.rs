//! Closed-form SNR cells in normalized variables.
//!
//! Every function returns SNR per unit T_I/T0 scaled back by `ti`; the
//! numerator and the denominator terms are kept separately so callers can
//! see which noise source dominates.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::poly::Poly;

/// Dimensionless inputs shared by all formulas. Radii are those of the
/// detection plane (a_L, rho_L in the far field).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalized {
    /// I = P T0 rho0^2 / a0^2.
    pub brightness: f64,
    /// Omega_B T0.
    pub omega_b_t0: f64,
    /// rho^2 / A1.
    pub rho_sq_over_a1: f64,
    /// A'_T / rho^2.
    pub area_over_rho_sq: f64,
    pub eta: f64,
    /// |T| at rho1, or at -rho1 for an inverted image.
    pub transmission: f64,
    /// T_I / T0.
    pub ti_over_t0: f64,
}

impl Normalized {
    /// The parameter set of the standard figures: |T| = 1, A'_T/rho^2 = 1e4, rho^2/A1 = 10, eta = 0.9.
    pub fn figure_defaults(brightness: f64, omega_b_t0: f64) -> Self {
        Self {
            brightness,
            omega_b_t0,
            rho_sq_over_a1: 10.0,
            area_over_rho_sq: 1e4,
            eta: 0.9,
            transmission: 1.0,
            ti_over_t0: 1.0,
        }
    }

    pub fn with_brightness(mut self, i: f64) -> Self {
        self.brightness = i;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cell {
    ThermalNarrowband,
    ThermalBroadband,
    QuantumNarrowbandNear,
    QuantumBroadbandNear,
    QuantumNarrowbandFar,
    QuantumBroadbandFar,
}

impl Cell {
    pub fn is_quantum(self) -> bool {
        !matches!(self, Cell::ThermalNarrowband | Cell::ThermalBroadband)
    }

    pub fn is_narrowband(self) -> bool {
        matches!(
            self,
            Cell::ThermalNarrowband | Cell::QuantumNarrowbandNear | Cell::QuantumNarrowbandFar
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseTerm {
    pub label: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Breakdown {
    pub numerator: f64,
    pub terms: Vec<NoiseTerm>,
    pub low_brightness: f64,
    pub high_brightness: f64,
}

impl Breakdown {
    pub fn snr(&self) -> f64 {
        let den: f64 = self.terms.iter().map(|t| t.value).sum();
        if self.numerator == 0.0 {
            0.0
        } else {
            self.numerator / den
        }
    }

    pub fn dominant(&self) -> &str {
        self.terms
            .iter()
            .max_by(|a, b| a.value.partial_cmp(&b.value).unwrap_or(std::cmp::Ordering::Equal))
            .map(|t| t.label.as_str())
            .unwrap_or("")
    }
}

fn term(label: &str, value: f64) -> NoiseTerm {
    NoiseTerm {
        label: label.to_string(),
        value,
    }
}

const SQRT_2: f64 = std::f64::consts::SQRT_2;

fn sqrt_pi() -> f64 {
    PI.sqrt()
}

/// A numerator of t^4 with a zero transmission: the SNR vanishes, and the
/// t-divided quantum terms are reported as infinite.
fn inv_t(t: f64, p: i32) -> f64 {
    if t == 0.0 {
        f64::INFINITY
    } else {
        t.powi(-p)
    }
}

pub fn thermal_narrowband(n: &Normalized) -> Breakdown {
    let Normalized {
        brightness: i,
        omega_b_t0: b,
        rho_sq_over_a1: r,
        area_over_rho_sq: m,
        eta,
        transmission: t,
        ti_over_t0: ti,
    } = *n;
    let t2 = t * t;
    let t4 = t2 * t2;
    Breakdown {
        numerator: t4 * ti,
        terms: vec![
            term("excess", m / (2.0 * PI).sqrt()),
            term("bucket-shot beat", t2 / (eta * i)),
            term("pinhole-shot beat", 4.0 * PI * r * t4 / (3.0 * eta * i)),
            term("shot", sqrt_pi() * b * r * t2 / (16.0 * SQRT_2 * eta * eta * i * i)),
        ],
        high_brightness: (2.0 * PI).sqrt() * ti * t4 / m,
        low_brightness: 16.0 * SQRT_2 / sqrt_pi() * ti * eta * eta * i * i * t2 / (b * r),
    }
}

pub fn thermal_broadband(n: &Normalized) -> Breakdown {
    let Normalized {
        brightness: i,
        omega_b_t0: b,
        rho_sq_over_a1: r,
        area_over_rho_sq: m,
        eta,
        transmission: t,
        ti_over_t0: ti,
    } = *n;
    let t2 = t * t;
    let t4 = t2 * t2;
    let s3 = 3f64.sqrt();
    Breakdown {
        numerator: t4 * ti,
        terms: vec![
            term("excess", 2.0 * SQRT_2 * m / (sqrt_pi() * b)),
            term("bucket-shot beat", 2.0 * t2 / (s3 * eta * i)),
            term("pinhole-shot beat", 8.0 * PI * r * t4 / (3.0 * s3 * eta * i)),
            term("shot", sqrt_pi() * r * t2 / (4.0 * eta * eta * i * i)),
        ],
        high_brightness: sqrt_pi() / (2.0 * SQRT_2) * b * ti * t4 / m,
        low_brightness: 4.0 / sqrt_pi() * ti * eta * eta * i * i * t2 / r,
    }
}

/// Coefficient of the brightness correction in each quantum numerator (1 + alpha/I)^2.
pub fn quantum_alpha(cell: Cell) -> f64 {
    match cell {
        Cell::QuantumNarrowbandNear => 1.0 / (2.0 * PI).sqrt(),
        Cell::QuantumBroadbandNear => 1.0 / (2.0 * sqrt_pi()),
        Cell::QuantumNarrowbandFar => 1.0 / (8.0 * PI).sqrt(),
        Cell::QuantumBroadbandFar => 1.0 / (4.0 * sqrt_pi()),
        _ => 0.0,
    }
}

fn quantum_narrowband(n: &Normalized, far: bool) -> Breakdown {
    let Normalized {
        brightness: i,
        omega_b_t0: b,
        rho_sq_over_a1: r,
        area_over_rho_sq: m,
        eta,
        transmission: t,
        ti_over_t0: ti,
    } = *n;
    let cell = if far {
        Cell::QuantumNarrowbandFar
    } else {
        Cell::QuantumNarrowbandNear
    };
    let g = 1.0 + quantum_alpha(cell) / i;
    let low_coef = if far { 8.0 / PI } else { 16.0 / PI };
    Breakdown {
        numerator: g * g * ti,
        terms: vec![
            term("excess", m / (2.0 * PI).sqrt() * inv_t(t, 4)),
            term("bucket-shot beat", inv_t(t, 2) / (eta * i)),
            term("pinhole-shot beat", 4.0 * PI * r / (3.0 * eta * i)),
            term(
                "shot",
                sqrt_pi() * r * b * inv_t(t, 2) / (16.0 * SQRT_2 * eta * eta * i * i) * g,
            ),
        ],
        high_brightness: (2.0 * PI).sqrt() * ti * t.powi(4) / m,
        low_brightness: low_coef * ti * eta * eta * i * t * t / (b * r),
    }
}

pub fn quantum_narrowband_near(n: &Normalized) -> Breakdown {
    quantum_narrowband(n, false)
}

pub fn quantum_narrowband_far(n: &Normalized) -> Breakdown {
    quantum_narrowband(n, true)
}

pub fn quantum_broadband_near(n: &Normalized) -> Breakdown {
    let Normalized {
        brightness: i,
        omega_b_t0: b,
        rho_sq_over_a1: r,
        area_over_rho_sq: m,
        eta,
        transmission: t,
        ti_over_t0: ti,
    } = *n;
    let s3 = 3f64.sqrt();
    let sp = sqrt_pi();
    let g = 1.0 + quantum_alpha(Cell::QuantumBroadbandNear) / i;
    let it2 = inv_t(t, 2);
    Breakdown {
        numerator: g * g * ti,
        terms: vec![
            term("excess", 8f64.sqrt() * m / (sp * b) * inv_t(t, 4)),
            // D1/I, split into its three parts
            term("bucket-shot beat", 2.0 * it2 / (s3 * eta * i)),
            term("bandwidth beat", 8f64.sqrt() / (b * i)),
            term("pinhole-shot beat", 8.0 * PI * r / (3.0 * s3 * eta * i)),
            term(
                "pair shot",
                (SQRT_2 / b + PI * r / eta * (1.0 + it2 / (2.0 * eta))) / (2.0 * sp * i * i),
            ),
            term("shot", r * it2 / (8.0 * eta * eta * i * i * i)),
        ],
        high_brightness: sp / (2.0 * SQRT_2) * b * ti * t.powi(4) / m,
        low_brightness: 2.0 / PI * ti * eta * eta * i * t * t / r,
    }
}

pub fn quantum_broadband_far(n: &Normalized) -> Breakdown {
    let Normalized {
        brightness: i,
        omega_b_t0: b,
        rho_sq_over_a1: r,
        area_over_rho_sq: m,
        eta,
        transmission: t,
        ti_over_t0: ti,
    } = *n;
    let s3 = 3f64.sqrt();
    let sp = sqrt_pi();
    let g = 1.0 + quantum_alpha(Cell::QuantumBroadbandFar) / i;
    let it2 = inv_t(t, 2);
    let d2 = SQRT_2 / b + 8.0 * PI * r / (3.0 * eta) * (1.0 + 3.0 * it2 / (4.0 * eta));
    Breakdown {
        numerator: g * g * ti,
        terms: vec![
            term("excess", 8f64.sqrt() * m / (sp * b) * inv_t(t, 4)),
            term("bucket-shot beat", 2.0 * it2 / (s3 * eta * i)),
            term("bandwidth beat", SQRT_2 / (b * i)),
            term("pinhole-shot beat", 8.0 * PI * r / (3.0 * s3 * eta * i)),
            term("pair shot", d2 / (8.0 * sp * i * i)),
            term("shot", r * it2 / (16.0 * eta * eta * i * i * i)),
        ],
        high_brightness: (PI / 8.0).sqrt() * b * ti * t.powi(4) / m,
        low_brightness: ti * eta * eta * i * t * t / (PI * r),
    }
}

pub fn evaluate(cell: Cell, n: &Normalized) -> Breakdown {
    match cell {
        Cell::ThermalNarrowband => thermal_narrowband(n),
        Cell::ThermalBroadband => thermal_broadband(n),
        Cell::QuantumNarrowbandNear => quantum_narrowband_near(n),
        Cell::QuantumBroadbandNear => quantum_broadband_near(n),
        Cell::QuantumNarrowbandFar => quantum_narrowband_far(n),
        Cell::QuantumBroadbandFar => quantum_broadband_far(n),
    }
}

/// SNR/(T_I/T0) = num(I)/den(I), with every other input frozen.
pub fn as_rational(cell: Cell, n: &Normalized) -> (Poly, Poly) {
    let Normalized {
        omega_b_t0: b,
        rho_sq_over_a1: r,
        area_over_rho_sq: m,
        eta,
        transmission: t,
        ..
    } = *n;
    let t2 = t * t;
    let t4 = t2 * t2;
    let sp = sqrt_pi();
    let s3 = 3f64.sqrt();
    match cell {
        Cell::ThermalNarrowband => (
            Poly::new(vec![0.0, 0.0, t4]),
            Poly::new(vec![
                sp * b * r * t2 / (16.0 * SQRT_2 * eta * eta),
                t2 / eta + 4.0 * PI * r * t4 / (3.0 * eta),
                m / (2.0 * PI).sqrt(),
            ]),
        ),
        Cell::ThermalBroadband => (
            Poly::new(vec![0.0, 0.0, t4]),
            Poly::new(vec![
                sp * r * t2 / (4.0 * eta * eta),
                2.0 * t2 / (s3 * eta) + 8.0 * PI * r * t4 / (3.0 * s3 * eta),
                2.0 * SQRT_2 * m / (sp * b),
            ]),
        ),
        _ => {
            // Multiply numerator and denominator by I^3 and by t^4.
            let a = quantum_alpha(cell);
            let num = Poly::new(vec![0.0, a * a * t4, 2.0 * a * t4, t4]);
            let (e, d1, c2, c3) = match cell {
                Cell::QuantumNarrowbandNear | Cell::QuantumNarrowbandFar => {
                    let c = sp * r * b * t2 / (16.0 * SQRT_2 * eta * eta);
                    (
                        m / (2.0 * PI).sqrt(),
                        t2 / eta + 4.0 * PI * r * t4 / (3.0 * eta),
                        c,
                        c * a,
                    )
                }
                Cell::QuantumBroadbandNear => (
                    8f64.sqrt() * m / (sp * b),
                    2.0 * t2 / (s3 * eta) + 8f64.sqrt() * t4 / b + 8.0 * PI * r * t4 / (3.0 * s3 * eta),
                    (SQRT_2 * t4 / b + PI * r / eta * (t4 + t2 / (2.0 * eta))) / (2.0 * sp),
                    r * t2 / (8.0 * eta * eta),
                ),
                _ => (
                    8f64.sqrt() * m / (sp * b),
                    2.0 * t2 / (s3 * eta) + SQRT_2 * t4 / b + 8.0 * PI * r * t4 / (3.0 * s3 * eta),
                    (SQRT_2 * t4 / b + 8.0 * PI * r / (3.0 * eta) * (t4 + 3.0 * t2 / (4.0 * eta)))
                        / (8.0 * sp),
                    r * t2 / (16.0 * eta * eta),
                ),
            };
            (num, Poly::new(vec![c3, c2, d1, e]))
        }
    }
}
