//! Normalized SNR-vs-brightness curves.

use anyhow::{bail, Result};
use ghostsnr::analytic::{formulas, Cell, Normalized};
use rayon::prelude::*;

use crate::config::log_space;
use crate::render::{fmt_g, Table};

pub const NARROW_BT: [f64; 3] = [10.0, 100.0, 1000.0];
pub const BROAD_BT: [f64; 3] = [0.1, 0.01, 0.001];
pub const RANGE: (f64, f64) = (1e-8, 1e8);
pub const POINTS: usize = 200;

#[derive(Clone, Debug)]
pub struct Figure {
    pub name: String,
    pub cell: Cell,
    pub title: &'static str,
    pub omega_b_t0: Vec<f64>,
    /// Everything but brightness and Omega_B T0.
    pub base: Normalized,
    pub points: usize,
}

impl Figure {
    pub fn by_name(name: &str) -> Result<Self> {
        let (cell, title) = match name {
            "2a" => (Cell::ThermalNarrowband, "thermal, narrowband"),
            "2b" => (Cell::ThermalBroadband, "thermal, broadband"),
            "3a" => (Cell::QuantumNarrowbandNear, "quantum, narrowband, near field"),
            "3b" => (Cell::QuantumBroadbandNear, "quantum, broadband, near field"),
            "4a" => (Cell::QuantumNarrowbandFar, "quantum, narrowband, far field"),
            "4b" => (Cell::QuantumBroadbandFar, "quantum, broadband, far field"),
            _ => bail!("unknown figure `{name}`; expected one of 2a 2b 3a 3b 4a 4b"),
        };
        let bt = if cell.is_narrowband() { NARROW_BT } else { BROAD_BT };
        Ok(Self {
            name: name.into(),
            cell,
            title,
            omega_b_t0: bt.to_vec(),
            base: Normalized::figure_defaults(1.0, 1.0),
            points: POINTS,
        })
    }

    /// Overrides by key: eta, rho0sq_over_A1, AT_prime_over_rho0sq, T, omegaB_T0 (comma list), points.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let num = || -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|_| anyhow::anyhow!("override `{key}`: `{value}` is not a number"))
        };
        match key.rsplit('.').next().unwrap_or(key) {
            "eta" => self.base.eta = num()?,
            "rho0sq_over_A1" => self.base.rho_sq_over_a1 = num()?,
            "AT_prime_over_rho0sq" => self.base.area_over_rho_sq = num()?,
            "T" => self.base.transmission = num()?,
            "points" => self.points = num()? as usize,
            "omegaB_T0" => {
                self.omega_b_t0 = value
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| anyhow::anyhow!("override `omegaB_T0`: expected a comma list of numbers"))?;
            }
            _ => bail!("unknown figure override `{key}`"),
        }
        Ok(())
    }

    pub fn column_names(&self) -> Vec<String> {
        let mut h = vec!["brightness".to_string()];
        for prefix in ["snr_normalized", "low_asymptote", "high_asymptote"] {
            for &b in &self.omega_b_t0 {
                h.push(format!("{prefix}_bt={}", fmt_g(b)));
            }
        }
        h
    }

    pub fn table(&self) -> Result<Table> {
        if self.points < 2 {
            bail!("a figure needs at least 2 points");
        }
        let xs = log_space(RANGE.0, RANGE.1, self.points);
        let rows: Vec<Vec<f64>> = xs
            .par_iter()
            .map(|&i| {
                let parts: Vec<_> = self
                    .omega_b_t0
                    .iter()
                    .map(|&b| {
                        let n = Normalized {
                            brightness: i,
                            omega_b_t0: b,
                            ti_over_t0: 1.0,
                            ..self.base
                        };
                        formulas::evaluate(self.cell, &n)
                    })
                    .collect();
                let mut r = vec![i];
                r.extend(parts.iter().map(|p| p.snr()));
                r.extend(parts.iter().map(|p| p.low_brightness));
                r.extend(parts.iter().map(|p| p.high_brightness));
                r
            })
            .collect();
        Ok(Table {
            header: self.column_names(),
            rows,
        })
    }
}
