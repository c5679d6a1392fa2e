//! Time integrals of products of Gaussian kernels and Gaussian filter branches.
//!
//! In units of T0 every factor is exp(-c (s_i - s_j)^2) or exp(-c s_i^2), so
//! each filter-branch combination integrates to amp * pi^{d/2} / sqrt(det M).

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::expr::Anchor;

/// One branch of h: amp * exp(-beta s^2), with H = exp(-2 W^2/Omega^2) per branch.
#[derive(Clone, Copy, Debug)]
pub struct Branch {
    pub amp: f64,
    pub beta: f64,
}

/// Branches of the AC-coupled response for Omega_B T0 and Omega_N T0.
/// A zero notch width contributes no branch: it only removes Omega = 0.
pub fn filter_branches(wb: f64, wn: f64) -> Vec<Branch> {
    let br = |w: f64, sign: f64| Branch {
        amp: sign * w / (2.0 * (2.0 * PI).sqrt()),
        beta: w * w / 8.0,
    };
    let mut v = vec![br(wb, 1.0)];
    if wn > 0.0 {
        v.push(br(wn, -1.0));
    }
    v
}

/// Quadratic form over (tau, node times) built from kernel couplings.
#[derive(Clone, Debug)]
pub struct TemporalForm {
    /// Variable 0 is the lag when present.
    pub m: DMatrix<f64>,
    pub has_lag: bool,
}

impl TemporalForm {
    pub fn new(nodes: usize, has_lag: bool) -> Self {
        let d = nodes + usize::from(has_lag);
        Self {
            m: DMatrix::zeros(d, d),
            has_lag,
        }
    }

    pub fn var(&self, node: usize) -> usize {
        node + usize::from(self.has_lag)
    }

    fn couple(m: &mut DMatrix<f64>, i: usize, j: usize, c: f64) {
        m[(i, i)] += c;
        m[(j, j)] += c;
        m[(i, j)] -= c;
        m[(j, i)] -= c;
    }

    /// exp(-(s_i - s_j)^2 / (2 dur^2)) between two nodes.
    pub fn add_kernel(&mut self, ni: usize, nj: usize, dur: f64) {
        if ni == nj {
            return;
        }
        let (i, j) = (self.var(ni), self.var(nj));
        Self::couple(&mut self.m, i, j, 1.0 / (2.0 * dur * dur));
    }

    /// Sum over branch choices of the filter edges, integrated over all variables.
    pub fn integrate(&self, edges: &[(usize, Anchor)], branches: &[Branch]) -> f64 {
        let d = self.m.nrows();
        let nb = branches.len();
        let combos = nb.pow(edges.len() as u32);
        let norm = PI.powf(d as f64 / 2.0);
        let mut total = 0.0;
        for mut code in 0..combos {
            let mut m = self.m.clone();
            let mut amp = 1.0;
            for &(node, anchor) in edges {
                let b = branches[code % nb];
                code /= nb;
                amp *= b.amp;
                let v = self.var(node);
                match anchor {
                    Anchor::T => m[(v, v)] += b.beta,
                    Anchor::U => {
                        assert!(self.has_lag, "lag anchor without a lag variable");
                        Self::couple(&mut m, 0, v, b.beta);
                    }
                }
            }
            let det = m.cholesky().map(|c| c.determinant()).unwrap_or(f64::NAN);
            total += amp * norm / det.sqrt();
        }
        total
    }
}
