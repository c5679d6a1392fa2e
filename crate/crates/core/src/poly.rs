//! Dense real polynomials, just enough for stationarity conditions.

use nalgebra::DMatrix;

/// Coefficients in ascending powers.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Poly(coeffs);
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.0.len() > 1 && *self.0.last().unwrap() == 0.0 {
            self.0.pop();
        }
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly(vec![0.0]);
        }
        Poly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let get = |p: &Poly, k: usize| p.0.get(k).copied().unwrap_or(0.0);
        Poly::new((0..n).map(|k| get(self, k) - get(other, k)).collect())
    }

    /// Drop leading coefficients that are rounding residue relative to the rest,
    /// judged at the scale `x` where the roots of interest live.
    pub fn cleaned(&self, x: f64, rel: f64) -> Poly {
        let scale = self
            .0
            .iter()
            .enumerate()
            .map(|(k, c)| (c * x.powi(k as i32)).abs())
            .fold(0.0, f64::max);
        let mut c = self.0.clone();
        while c.len() > 1 {
            let k = c.len() - 1;
            if (c[k] * x.powi(k as i32)).abs() <= rel * scale {
                c.pop();
            } else {
                break;
            }
        }
        Poly(c)
    }

    /// Real roots from the companion matrix, polished by Newton steps.
    pub fn real_roots(&self) -> Vec<f64> {
        let n = self.degree();
        if n == 0 {
            return Vec::new();
        }
        let lead = self.0[n];
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            m[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            m[(i, n - 1)] = -self.0[i] / lead;
        }
        let d = self.derivative();
        let mut out = Vec::new();
        for z in m.complex_eigenvalues().iter() {
            if z.im.abs() > 1e-6 * z.re.abs().max(1e-300) {
                continue;
            }
            let mut x = z.re;
            for _ in 0..50 {
                let dp = d.eval(x);
                if dp == 0.0 {
                    break;
                }
                let step = self.eval(x) / dp;
                x -= step;
                if step.abs() <= 1e-15 * x.abs() {
                    break;
                }
            }
            out.push(x);
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_product() {
        // (x - 1e-2)(x - 3)(x + 2)
        let p = Poly::new(vec![-1e-2, 1.0])
            .mul(&Poly::new(vec![-3.0, 1.0]))
            .mul(&Poly::new(vec![2.0, 1.0]));
        let r = p.real_roots();
        assert_eq!(r.len(), 3);
        assert!((r[0] + 2.0).abs() < 1e-12);
        assert!((r[1] - 1e-2).abs() < 1e-14);
        assert!((r[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn complex_pair_skipped() {
        let p = Poly::new(vec![1.0, 0.0, 1.0]);
        assert!(p.real_roots().is_empty());
    }
}
