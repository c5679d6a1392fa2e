//! Gauss-Legendre rules and bucket-plane quadrature over a mask.

use std::f64::consts::PI;

use crate::model::{MaskShape, MaskSpec};

/// n-point Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Composite rule: `panels` equal panels of `order`-point Gauss-Legendre on [a, b].
pub fn composite(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x0, w0) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut x = Vec::with_capacity(panels * order);
    let mut w = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + h * p as f64;
        for (xi, wi) in x0.iter().zip(&w0) {
            x.push(lo + 0.5 * h * (xi + 1.0));
            w.push(0.5 * h * wi);
        }
    }
    (x, w)
}

/// Order of each Gauss-Legendre panel.
pub const PANEL_ORDER: usize = 8;

/// 2-D rule organised in rows of constant first coordinate. Weights include |T|^2.
#[derive(Clone, Debug)]
pub struct BucketRule {
    pub rows: Vec<Row>,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub x: f64,
    pub ys: Vec<f64>,
    pub weights: Vec<f64>,
}

impl BucketRule {
    pub fn len(&self) -> usize {
        self.rows.iter().map(|r| r.ys.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn total_weight(&self) -> f64 {
        self.rows.iter().flat_map(|r| r.weights.iter()).sum()
    }

    /// Rule with `panels` panels per axis for the mask. Unbounded masks use
    /// the square of half-width `fallback_half_width`.
    pub fn for_mask(mask: &MaskSpec, panels: usize, fallback_half_width: f64) -> Self {
        match mask.shape {
            MaskShape::Disk { radius } => Self::disk(mask.center, radius, panels),
            _ => {
                let (lo, hi) = mask.support().unwrap_or((
                    [mask.center[0] - fallback_half_width, mask.center[1] - fallback_half_width],
                    [mask.center[0] + fallback_half_width, mask.center[1] + fallback_half_width],
                ));
                let (xs, wx) = composite(lo[0], hi[0], panels, PANEL_ORDER);
                let (ys, wy) = composite(lo[1], hi[1], panels, PANEL_ORDER);
                let rows = xs
                    .iter()
                    .zip(&wx)
                    .map(|(&x, &w1)| Row {
                        x,
                        ys: ys.clone(),
                        weights: ys
                            .iter()
                            .zip(&wy)
                            .map(|(&y, &w2)| w1 * w2 * mask.intensity_at([x, y]))
                            .collect(),
                    })
                    .collect();
                BucketRule { rows }
            }
        }
    }

    /// Disk in (theta, s) with x = R sin(theta), y = R cos(theta) s; smooth up to the rim.
    fn disk(c: [f64; 2], radius: f64, panels: usize) -> Self {
        let (th, wth) = composite(-PI / 2.0, PI / 2.0, panels, PANEL_ORDER);
        let (s, ws) = composite(-1.0, 1.0, panels, PANEL_ORDER);
        let rows = th
            .iter()
            .zip(&wth)
            .map(|(&t, &wt)| {
                let half = radius * t.cos();
                Row {
                    x: c[0] + radius * t.sin(),
                    ys: s.iter().map(|&si| c[1] + half * si).collect(),
                    weights: ws.iter().map(|&wi| wt * radius * t.cos() * half * wi).collect(),
                }
            })
            .collect();
        BucketRule { rows }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        // exact to degree 15
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((i - 2.0 / 15.0).abs() < 1e-14);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn odd_order_has_center_node() {
        let (x, w) = gauss_legendre(5);
        assert!(x[2].abs() < 1e-15);
        assert!((w[2] - 128.0 / 225.0).abs() < 1e-14);
    }

    #[test]
    fn disk_rule_area() {
        let m = MaskSpec::centered_at(MaskShape::Disk { radius: 2.0 }, [0.5, -1.0]).unwrap();
        let r = BucketRule::for_mask(&m, 2, 0.0);
        assert!((r.total_weight() - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn gaussian_rule_area() {
        let m = MaskSpec::gaussian(1.5).unwrap();
        let r = BucketRule::for_mask(&m, 6, 0.0);
        let exact = m.transmitted_area().unwrap();
        assert!((r.total_weight() / exact - 1.0).abs() < 1e-10);
    }
}
