//! Transverse integrals of products of Gaussian kernels over the bucket plane.
//!
//! The exponent is an isotropic quadratic form in the points
//! (rho1, x, y): Q = sum_ij a_ij p_i . p_j, so a 3x3 matrix holds it.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::model::{MaskShape, MaskSpec};
use crate::quadrature::BucketRule;

/// Point index 0 is the pinhole; 1 and 2 are bucket variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialForm {
    pub a: [[f64; 3]; 3],
    /// Number of bucket variables (1 or 2).
    pub buckets: usize,
}

impl SpatialForm {
    pub fn new(buckets: usize) -> Self {
        Self {
            a: [[0.0; 3]; 3],
            buckets,
        }
    }

    /// Add exp(-(|p_i|^2+|p_j|^2)/env^2 - |p_j -/+ p_i|^2/(2 coh^2)).
    pub fn add_kernel(&mut self, i: usize, j: usize, env: f64, coh: f64, inverted: bool) {
        let alpha = 1.0 / (env * env) + 1.0 / (2.0 * coh * coh);
        let beta = if inverted { 1.0 } else { -1.0 } / (2.0 * coh * coh);
        if i == j {
            self.a[i][i] += 2.0 * alpha + 2.0 * beta;
        } else {
            self.a[i][i] += alpha;
            self.a[j][j] += alpha;
            self.a[i][j] += beta;
            self.a[j][i] += beta;
        }
    }

    pub fn key(&self) -> [u64; 10] {
        let mut k = [0u64; 10];
        let mut n = 0;
        for i in 0..3 {
            for j in i..3 {
                k[n] = self.a[i][j].to_bits();
                n += 1;
            }
        }
        k[9] = self.buckets as u64;
        k
    }

    fn q(&self, pts: &[[f64; 2]]) -> f64 {
        let mut s = 0.0;
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                s += self.a[i][j] * (pts[i][0] * pts[j][0] + pts[i][1] * pts[j][1]);
            }
        }
        s
    }
}

/// Quadratic in the bucket variables, one Cartesian component at a time:
/// sum_c (z_c^T B z_c - 2 g_c^T z_c) + c0.
struct Reduced {
    b: DMatrix<f64>,
    g: [DVector<f64>; 2],
    c0: f64,
    scale: f64,
}

fn reduce(form: &SpatialForm, pin: [f64; 2], mask: &MaskSpec) -> Reduced {
    let k = form.buckets;
    let mut b = DMatrix::zeros(k, k);
    let mut g = [DVector::zeros(k), DVector::zeros(k)];
    let mut c0 = form.a[0][0] * (pin[0] * pin[0] + pin[1] * pin[1]);
    let mut scale = 1.0;
    for i in 0..k {
        for j in 0..k {
            b[(i, j)] = form.a[i + 1][j + 1];
        }
        for c in 0..2 {
            g[c][i] = -form.a[i + 1][0] * pin[c];
        }
        match mask.shape {
            MaskShape::GaussianSpot { waist } => {
                let s = 2.0 / (waist * waist);
                b[(i, i)] += s;
                for c in 0..2 {
                    g[c][i] += s * mask.center[c];
                }
                c0 += s * (mask.center[0].powi(2) + mask.center[1].powi(2));
            }
            MaskShape::Uniform { value } => scale *= value * value,
            MaskShape::Disk { .. } => {}
        }
    }
    Reduced { b, g, c0, scale }
}

/// Closed form for Gaussian and uniform masks; None for a disk.
pub fn closed_form(form: &SpatialForm, pin: [f64; 2], mask: &MaskSpec) -> Option<f64> {
    if matches!(mask.shape, MaskShape::Disk { .. }) {
        return None;
    }
    let r = reduce(form, pin, mask);
    if r.scale == 0.0 {
        return Some(0.0);
    }
    let k = form.buckets as i32;
    let chol = r.b.clone().cholesky()?;
    let det = chol.determinant();
    let mut e = -r.c0;
    for c in 0..2 {
        let x = chol.solve(&r.g[c]);
        e += r.g[c].dot(&x);
    }
    Some(r.scale * PI.powi(k) / det * e.exp())
}

/// Same integral on a bucket rule, with the pinhole fixed.
pub fn by_quadrature(form: &SpatialForm, pin: [f64; 2], rule: &BucketRule) -> f64 {
    match form.buckets {
        1 => {
            let mut s = 0.0;
            for row in &rule.rows {
                for (&y, &w) in row.ys.iter().zip(&row.weights) {
                    if w != 0.0 {
                        s += w * (-form.q(&[pin, [row.x, y]])).exp();
                    }
                }
            }
            s
        }
        2 => two_point(form, pin, rule),
        _ => unreachable!("bucket variable count is 1 or 2"),
    }
}

fn two_point(form: &SpatialForm, pin: [f64; 2], rule: &BucketRule) -> f64 {
    // Shift by the minimum of the form so no exponential overflows.
    let a = &form.a;
    let bmat = nalgebra::Matrix2::new(a[1][1], a[1][2], a[2][1], a[2][2]);
    let mut shift = a[0][0] * (pin[0] * pin[0] + pin[1] * pin[1]);
    if let Some(ch) = bmat.cholesky() {
        for c in 0..2 {
            let g = nalgebra::Vector2::new(-a[1][0] * pin[c], -a[2][0] * pin[c]);
            shift -= g.dot(&ch.solve(&g));
        }
    }
    let pts: Vec<([f64; 2], f64)> = rule
        .rows
        .iter()
        .flat_map(|r| r.ys.iter().zip(&r.weights).map(move |(&y, &w)| ([r.x, y], w)))
        .filter(|(_, w)| *w != 0.0)
        .collect();
    // single-point parts and the cross coupling 2 a12 u.v
    let single = |p: [f64; 2], i: usize| {
        a[i][i] * (p[0] * p[0] + p[1] * p[1]) + 2.0 * a[0][i] * (pin[0] * p[0] + pin[1] * p[1])
    };
    let su: Vec<f64> = pts.iter().map(|(p, _)| single(*p, 1)).collect();
    let sv: Vec<f64> = pts.iter().map(|(p, _)| single(*p, 2)).collect();
    let c = 2.0 * a[1][2];
    let rest = a[0][0] * (pin[0] * pin[0] + pin[1] * pin[1]) - shift;
    let mut total = 0.0;
    for (iu, (u, wu)) in pts.iter().enumerate() {
        let mut inner = 0.0;
        for (iv, (v, wv)) in pts.iter().enumerate() {
            let q = su[iu] + sv[iv] + c * (u[0] * v[0] + u[1] * v[1]) + rest;
            inner += wv * (-q).exp();
        }
        total += wu * inner;
    }
    total * (-shift).exp()
}

/// Tensor-product rule on a box, used when every row shares its nodes. The
/// double bucket integral then reduces to n x n matrix products.
pub fn by_tensor_quadrature(
    form: &SpatialForm,
    pin: [f64; 2],
    xs: &[f64],
    ys: &[f64],
    weights: &DMatrix<f64>,
) -> f64 {
    let a = &form.a;
    match form.buckets {
        1 => {
            // exp(-Q) = e^{-c0} f0(x) f1(y)
            let c0 = a[0][0] * (pin[0] * pin[0] + pin[1] * pin[1]);
            let f = |z: f64, c: usize| (-(a[1][1] * z * z + 2.0 * a[0][1] * pin[c] * z)).exp();
            let fx: Vec<f64> = xs.iter().map(|&x| f(x, 0)).collect();
            let fy: Vec<f64> = ys.iter().map(|&y| f(y, 1)).collect();
            let mut s = 0.0;
            for (i, fxi) in fx.iter().enumerate() {
                for (j, fyj) in fy.iter().enumerate() {
                    s += weights[(i, j)] * fxi * fyj;
                }
            }
            s * (-c0).exp()
        }
        2 => {
            let bmat = nalgebra::Matrix2::new(a[1][1], a[1][2], a[2][1], a[2][2]);
            let Some(ch) = bmat.cholesky() else {
                return f64::NAN;
            };
            let mut shift = [0.0; 2];
            let c0 = a[0][0] * (pin[0] * pin[0] + pin[1] * pin[1]);
            for c in 0..2 {
                let g = nalgebra::Vector2::new(-a[1][0] * pin[c], -a[2][0] * pin[c]);
                shift[c] = -g.dot(&ch.solve(&g));
            }
            let fmat = |nodes: &[f64], c: usize| {
                DMatrix::from_fn(nodes.len(), nodes.len(), |i, k| {
                    let (u, v) = (nodes[i], nodes[k]);
                    let q = a[1][1] * u * u
                        + 2.0 * a[1][2] * u * v
                        + a[2][2] * v * v
                        + 2.0 * (a[0][1] * u + a[0][2] * v) * pin[c];
                    (-(q - shift[c])).exp()
                })
            };
            let f0 = fmat(xs, 0);
            let f1 = fmat(ys, 1);
            // sum_{i,j,k,l} W[i,j] W[k,l] F0[i,k] F1[j,l]
            let m = weights * &f1 * weights.transpose();
            let s = f0.component_mul(&m).sum();
            s * (-(c0 + shift[0] + shift[1])).exp()
        }
        _ => unreachable!("bucket variable count is 1 or 2"),
    }
}
