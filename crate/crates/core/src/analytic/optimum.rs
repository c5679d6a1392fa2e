use serde::{Deserialize, Serialize};

use super::formulas::{as_rational, evaluate, Cell, Normalized};
use super::{select_cell, SnrQuery};
use crate::error::Result;
use crate::poly::Poly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptimumMethod {
    /// Root of the stationarity polynomial.
    StationaryRoot,
    /// Refined maximum of a log-spaced scan.
    GridScan,
    /// No interior maximum: the SNR rises to its bright-source value.
    Monotone,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    /// Maximizing brightness; infinite for a monotone curve.
    pub brightness: f64,
    /// SNR at the optimum (the saturation value when monotone).
    pub snr: f64,
    pub saturation_snr: f64,
    pub method: OptimumMethod,
}

/// Scan range used for the fallback and for sanity checks.
pub const SCAN_RANGE: (f64, f64) = (1e-8, 1e8);

fn snr_at(cell: Cell, n: &Normalized, i: f64) -> f64 {
    evaluate(cell, &n.with_brightness(i)).snr()
}

/// d/dI (num/den) = 0, with the analytically cancelling top coefficients removed.
fn stationarity(num: &Poly, den: &Poly) -> Poly {
    let dn = num.derivative();
    let dd = den.derivative();
    let r = dn.mul(den).sub(&num.mul(&dd));
    let abs = |p: &Poly| Poly(p.0.iter().map(|c| c.abs()).collect());
    let scale = abs(&dn).mul(&abs(den)).0;
    let scale2 = abs(num).mul(&abs(&dd)).0;
    let mut c = r.0;
    while c.len() > 1 {
        let k = c.len() - 1;
        let s = scale.get(k).copied().unwrap_or(0.0) + scale2.get(k).copied().unwrap_or(0.0);
        if c[k].abs() <= 1e-10 * s {
            c.pop();
        } else {
            break;
        }
    }
    Poly(c)
}

/// Index of the largest SNR on `npts` log-spaced brightness values.
pub fn grid_argmax(cell: Cell, n: &Normalized, lo: f64, hi: f64, npts: usize) -> (usize, f64, f64) {
    let (l0, l1) = (lo.ln(), hi.ln());
    let mut best = (0, lo, f64::NEG_INFINITY);
    for k in 0..npts {
        let i = (l0 + (l1 - l0) * k as f64 / (npts - 1) as f64).exp();
        let s = snr_at(cell, n, i);
        if s > best.2 {
            best = (k, i, s);
        }
    }
    best
}

fn golden_max(cell: Cell, n: &Normalized, mut a: f64, mut b: f64) -> f64 {
    // in ln I
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let f = |x: f64| snr_at(cell, n, x.exp());
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..200 {
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
        if (b - a).abs() < 1e-12 {
            break;
        }
    }
    ((a + b) / 2.0).exp()
}

pub fn optimal_brightness_normalized(cell: Cell, n: &Normalized) -> Optimum {
    let saturation = evaluate(cell, n).high_brightness;
    let (num, den) = as_rational(cell, n);
    let r = stationarity(&num, &den);
    let mut best: Option<(f64, f64)> = None;
    for x in r.real_roots() {
        if !(x > 0.0 && x.is_finite()) {
            continue;
        }
        let s = snr_at(cell, n, x);
        let h = 1e-4;
        if s >= snr_at(cell, n, x * (1.0 - h)) && s >= snr_at(cell, n, x * (1.0 + h)) && s > saturation
        {
            if best.map_or(true, |(_, bs)| s > bs) {
                best = Some((x, s));
            }
        }
    }
    if let Some((x, s)) = best {
        return Optimum {
            brightness: x,
            snr: s,
            saturation_snr: saturation,
            method: OptimumMethod::StationaryRoot,
        };
    }
    // Fallback: scan, then refine if the peak is interior.
    let npts = 400;
    let (k, _, _) = grid_argmax(cell, n, SCAN_RANGE.0, SCAN_RANGE.1, npts);
    if k > 0 && k < npts - 1 {
        let step = (SCAN_RANGE.1 / SCAN_RANGE.0).ln() / (npts - 1) as f64;
        let c = SCAN_RANGE.0.ln() + step * k as f64;
        let x = golden_max(cell, n, c - step, c + step);
        let s = snr_at(cell, n, x);
        if s > saturation {
            return Optimum {
                brightness: x,
                snr: s,
                saturation_snr: saturation,
                method: OptimumMethod::GridScan,
            };
        }
    }
    Optimum {
        brightness: f64::INFINITY,
        snr: saturation,
        saturation_snr: saturation,
        method: OptimumMethod::Monotone,
    }
}

/// Brightness that maximizes the closed-form SNR of `q`, all else fixed.
pub fn optimal_brightness(q: &SnrQuery) -> Result<Optimum> {
    let cell = select_cell(q)?;
    let n = q.normalized()?;
    Ok(optimal_brightness_normalized(cell, &n))
}
