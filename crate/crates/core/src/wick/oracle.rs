use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::expr::{
    enumerate_pairings, fourth_moment_factors, normal_order, Anchor, CurrentFactor, Detector,
    MomentExpression, PairType, Pairing, SpaceVar,
};
use super::spatial::{self, SpatialForm};
use super::temporal::{filter_branches, Branch, TemporalForm};
use crate::error::{invalid, Error, Result};
use crate::model::{GaussianTerm, MaskShape, MaskSpec, SourceKind, SystemConfig, Thresholds};
use crate::quadrature::{composite, BucketRule, PANEL_ORDER};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Stop doubling once mean and variance change by less than this.
    pub rel_tol: f64,
    /// Upper limit on panels per axis.
    pub max_panels: usize,
    /// Integrate Gaussian and uniform masks numerically as well.
    pub force_quadrature: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-4,
            max_panels: 128,
            force_quadrature: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    pub quadrature: QuadratureConfig,
    /// Largest pinhole area, as a fraction of the coherence area pi rho^2.
    pub max_pinhole_fraction: f64,
    pub thresholds: Thresholds,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            quadrature: QuadratureConfig::default(),
            max_pinhole_fraction: 0.2,
            thresholds: Thresholds::default(),
        }
    }
}

/// Variance classes by the number of commutator deltas in the moment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NoiseClass {
    ExcessExcess,
    ExcessShot,
    ShotShot,
}

impl NoiseClass {
    fn from_deltas(n: usize) -> Self {
        match n {
            0 => NoiseClass::ExcessExcess,
            1 => NoiseClass::ExcessShot,
            _ => NoiseClass::ShotShot,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub class: NoiseClass,
    /// The pairing contracts a merged (shot-noise) event with itself, so the
    /// term carries a mean photon flux rather than a correlation.
    pub mean_intensity: bool,
    pub pairings: usize,
    /// Contribution to the variance, A^4.
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TermLedger {
    pub entries: Vec<LedgerEntry>,
    /// Pairings removed because a lone filter integrates a constant (H(0) = 0).
    pub background_killed: usize,
    /// Their contribution, identically zero.
    pub background_value: f64,
    /// Pairings that factor into <C>^2 and cancel against it.
    pub mean_product: usize,
}

impl TermLedger {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.value).sum()
    }

    pub fn class_total(&self, class: NoiseClass) -> f64 {
        self.entries.iter().filter(|e| e.class == class).map(|e| e.value).sum()
    }

    /// Variance without the mean-intensity shot terms.
    pub fn correlated_only(&self) -> f64 {
        self.entries.iter().filter(|e| !e.mean_intensity).map(|e| e.value).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    /// <C>, A^2.
    pub mean: f64,
    /// <dC^2>, A^4.
    pub variance: f64,
    pub snr: f64,
    pub term_ledger: TermLedger,
    pub quadrature_error_estimate: f64,
    /// Largest |Im|/|Re| seen before discarding the imaginary parts.
    pub imaginary_residue: f64,
    pub warnings: Vec<String>,
}

impl OracleResult {
    pub fn snr_normalized(&self, ti_over_t0: f64) -> f64 {
        self.snr / ti_over_t0
    }

    /// SNR with the mean-intensity shot terms left out of the variance.
    pub fn snr_correlated_only(&self) -> f64 {
        self.mean * self.mean / self.term_ledger.correlated_only()
    }
}

#[derive(Clone, Copy, Debug)]
struct Comp {
    amp: Complex64,
    env: f64,
    coh: f64,
    dur: f64,
    inverted: bool,
}

/// Problem in units of the detection-plane coherence radius and T0.
struct Scaled {
    kind: SourceKind,
    auto: Vec<Comp>,
    cross: Vec<Comp>,
    eta: f64,
    a1: f64,
    pin: [f64; 2],
    mask: MaskSpec,
    envelope: f64,
    branches: Vec<Branch>,
    t0: f64,
    q: f64,
}

fn scale_mask(m: &MaskSpec, rho: f64) -> MaskSpec {
    let shape = match m.shape {
        MaskShape::Disk { radius } => MaskShape::Disk {
            radius: radius / rho,
        },
        MaskShape::GaussianSpot { waist } => MaskShape::GaussianSpot { waist: waist / rho },
        s @ MaskShape::Uniform { .. } => s,
    };
    MaskSpec {
        shape,
        center: [m.center[0] / rho, m.center[1] / rho],
    }
}

impl Scaled {
    fn new(sys: &SystemConfig, opts: &OracleOptions) -> Result<Self> {
        let src = &sys.source;
        let (a, rho) = sys.geometry.plane_radii(src)?;
        let t0 = src.coherence_time();
        let conv = |terms: Vec<GaussianTerm>| -> Vec<Comp> {
            terms
                .into_iter()
                .map(|t| Comp {
                    amp: t.amplitude * (rho * rho * t0),
                    env: t.envelope / rho,
                    coh: t.coherence / rho,
                    dur: t.duration / t0,
                    inverted: t.inverted,
                })
                .collect()
        };
        let det = &sys.detector;
        let a1 = det.pinhole_area() / (rho * rho);
        if a1 > opts.max_pinhole_fraction * PI {
            return Err(invalid(
                "detector.A1",
                format!(
                    "pinhole area is {:.3} coherence areas; the point-pinhole model needs <= {}",
                    a1 / PI,
                    opts.max_pinhole_fraction
                ),
            ));
        }
        let p = det.pinhole_pos();
        Ok(Self {
            kind: src.kind(),
            auto: conv(sys.auto_kernel()?.terms()),
            cross: conv(sys.cross_kernel()?.terms()),
            eta: det.eta(),
            a1,
            pin: [p[0] / rho, p[1] / rho],
            mask: scale_mask(&sys.mask, rho),
            envelope: a / rho,
            branches: filter_branches(det.omega_b() * t0, det.omega_n() * t0),
            t0,
            q: det.charge(),
        })
    }
}

enum Rule {
    Closed,
    Rows(BucketRule),
    Tensor {
        xs: Vec<f64>,
        ys: Vec<f64>,
        w: DMatrix<f64>,
    },
}

struct Integrator<'a> {
    s: &'a Scaled,
    rule: Rule,
    cache: HashMap<[u64; 10], f64>,
}

impl<'a> Integrator<'a> {
    fn spatial(&mut self, form: &SpatialForm) -> f64 {
        if let Some(v) = self.cache.get(&form.key()) {
            return *v;
        }
        let v = match &self.rule {
            Rule::Closed => spatial::closed_form(form, self.s.pin, &self.s.mask).unwrap_or(f64::NAN),
            Rule::Rows(r) => spatial::by_quadrature(form, self.s.pin, r),
            Rule::Tensor { xs, ys, w } => spatial::by_tensor_quadrature(form, self.s.pin, xs, ys, w),
        };
        self.cache.insert(form.key(), v);
        v
    }
}

enum Outcome {
    Kept { value: Complex64, mean_intensity: bool },
    Killed,
    MeanProduct,
}

fn find(p: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while p[r] != r {
        r = p[r];
    }
    let mut y = x;
    while p[y] != r {
        let n = p[y];
        p[y] = r;
        y = n;
    }
    r
}

/// Structural classification of a pairing before any integral is done.
fn classify(e: &MomentExpression, pairing: &Pairing, lag: bool) -> Option<Outcome> {
    let nn = e.nodes.len();
    // node of each label's partner
    let mut self_paired = vec![false; nn];
    for pr in &pairing.pairs {
        let (na, nb) = (e.labels[pr.a].node, e.labels[pr.b].node);
        if na == nb {
            self_paired[na] = true;
        }
    }
    for (k, n) in e.nodes.iter().enumerate() {
        if self_paired[k] && n.filters.len() == 1 {
            return Some(Outcome::Killed);
        }
    }
    if lag {
        // vertices: anchor T = nn, anchor U = nn + 1
        let mut parent: Vec<usize> = (0..nn + 2).collect();
        let join = |p: &mut Vec<usize>, a: usize, b: usize| {
            let (ra, rb) = (find(p, a), find(p, b));
            if ra != rb {
                p[ra] = rb;
            }
        };
        for (k, n) in e.nodes.iter().enumerate() {
            for a in &n.filters {
                let v = match a {
                    Anchor::T => nn,
                    Anchor::U => nn + 1,
                };
                join(&mut parent, k, v);
            }
        }
        for pr in &pairing.pairs {
            join(&mut parent, e.labels[pr.a].node, e.labels[pr.b].node);
        }
        if find(&mut parent, nn) != find(&mut parent, nn + 1) {
            return Some(Outcome::MeanProduct);
        }
    }
    None
}

fn point_index(s: SpaceVar) -> usize {
    match s {
        SpaceVar::Pinhole => 0,
        SpaceVar::Bucket(k) => 1 + k,
    }
}

fn evaluate_pairing(
    integ: &mut Integrator,
    e: &MomentExpression,
    pairing: &Pairing,
    lag: bool,
) -> Outcome {
    if let Some(o) = classify(e, pairing, lag) {
        return o;
    }
    let s = integ.s;
    let comps: Vec<(&[Comp], bool)> = pairing
        .pairs
        .iter()
        .map(|p| match p.kind {
            PairType::PiAuto => (s.auto.as_slice(), false),
            PairType::PiCross | PairType::PsCross => (s.cross.as_slice(), false),
            PairType::PsCrossConj => (s.cross.as_slice(), true),
        })
        .collect();
    let buckets = e
        .nodes
        .iter()
        .filter(|n| n.detector == Detector::Bucket)
        .count();
    let edges: Vec<(usize, Anchor)> = e
        .nodes
        .iter()
        .enumerate()
        .flat_map(|(k, n)| n.filters.iter().map(move |&a| (k, a)))
        .collect();

    let mut idx = vec![0usize; comps.len()];
    let mut sum = Complex64::new(0.0, 0.0);
    loop {
        let mut coef = Complex64::new(1.0, 0.0);
        let mut sf = SpatialForm::new(buckets);
        let mut tf = TemporalForm::new(e.nodes.len(), lag);
        for (k, pr) in pairing.pairs.iter().enumerate() {
            let (list, conj) = comps[k];
            let c = list[idx[k]];
            coef *= if conj { c.amp.conj() } else { c.amp };
            let (la, lb) = (e.labels[pr.a], e.labels[pr.b]);
            sf.add_kernel(point_index(la.space), point_index(lb.space), c.env, c.coh, c.inverted);
            tf.add_kernel(la.node, lb.node, c.dur);
        }
        let space = integ.spatial(&sf);
        let time = tf.integrate(&edges, &s.branches);
        sum += coef * (space * time);
        // next component assignment
        let mut k = 0;
        loop {
            if k == idx.len() {
                break;
            }
            idx[k] += 1;
            if idx[k] < comps[k].0.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == idx.len() {
            break;
        }
    }
    let weight: f64 = e
        .nodes
        .iter()
        .map(|n| match n.detector {
            Detector::Pinhole => s.eta * s.a1,
            Detector::Bucket => s.eta,
        })
        .product();
    let mean_intensity = e.nodes.iter().enumerate().any(|(k, n)| {
        n.filters.len() > 1
            && pairing
                .pairs
                .iter()
                .any(|p| e.labels[p.a].node == k && e.labels[p.b].node == k)
    });
    Outcome::Kept {
        value: sum * (weight * e.prefactor),
        mean_intensity,
    }
}

/// Normalized mean and variance for one quadrature rule.
struct Pass {
    mean: Complex64,
    var_terms: Vec<(NoiseClass, bool, Complex64)>,
    killed: usize,
    mean_product: usize,
}

fn one_pass(s: &Scaled, rule: Rule, variance: bool) -> Pass {
    let mut integ = Integrator {
        s,
        rule,
        cache: HashMap::new(),
    };
    let mean_expr = &normal_order(&[
        CurrentFactor::new(Detector::Pinhole, Anchor::T),
        CurrentFactor::new(Detector::Bucket, Anchor::T),
    ])[0];
    let mut mean = Complex64::new(0.0, 0.0);
    for p in enumerate_pairings(mean_expr, s.kind) {
        if let Outcome::Kept { value, .. } = evaluate_pairing(&mut integ, mean_expr, &p, false) {
            mean += value;
        }
    }
    let mut pass = Pass {
        mean,
        var_terms: Vec::new(),
        killed: 0,
        mean_product: 0,
    };
    if !variance {
        return pass;
    }
    // Deterministic order: expressions as returned, pairings in enumeration order.
    for e in normal_order(&fourth_moment_factors()) {
        let class = NoiseClass::from_deltas(e.deltas.len());
        for p in enumerate_pairings(&e, s.kind) {
            match evaluate_pairing(&mut integ, &e, &p, true) {
                Outcome::Kept {
                    value,
                    mean_intensity,
                } => pass.var_terms.push((class, mean_intensity, value)),
                Outcome::Killed => pass.killed += 1,
                Outcome::MeanProduct => pass.mean_product += 1,
            }
        }
    }
    pass
}

fn rule_for(s: &Scaled, panels: usize) -> Rule {
    match s.mask.shape {
        MaskShape::Disk { .. } => Rule::Rows(BucketRule::for_mask(&s.mask, panels, 0.0)),
        _ => {
            let (lo, hi) = s.mask.support().unwrap_or_else(|| {
                let h = 4.5 * s.envelope;
                ([-h, -h], [h, h])
            });
            let (xs, wx) = composite(lo[0], hi[0], panels, PANEL_ORDER);
            let (ys, wy) = composite(lo[1], hi[1], panels, PANEL_ORDER);
            let w = DMatrix::from_fn(xs.len(), ys.len(), |i, j| {
                wx[i] * wy[j] * s.mask.intensity_at([xs[i], ys[j]])
            });
            Rule::Tensor { xs, ys, w }
        }
    }
}

fn initial_panels(s: &Scaled) -> usize {
    let half = match s.mask.shape {
        MaskShape::Disk { radius } => radius,
        MaskShape::GaussianSpot { waist } => 3.72 * waist,
        MaskShape::Uniform { .. } => 4.5 * s.envelope,
    };
    (half.ceil() as usize).max(2)
}

fn rel_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

/// Run passes until the quadrature settles. Returns the pass and the error estimate.
fn converged_pass(s: &Scaled, q: &QuadratureConfig, variance: bool) -> Result<(Pass, f64)> {
    let closed = !q.force_quadrature && !matches!(s.mask.shape, MaskShape::Disk { .. });
    if closed {
        return Ok((one_pass(s, Rule::Closed, variance), 0.0));
    }
    let var_of = |p: &Pass| p.var_terms.iter().map(|t| t.2.re).sum::<f64>();
    let mut panels = initial_panels(s).min(q.max_panels);
    let mut prev = one_pass(s, rule_for(s, panels), variance);
    loop {
        let next_panels = panels * 2;
        if next_panels > q.max_panels {
            let msg = format!(
                "bucket quadrature not converged at {panels} panels (tolerance {:e})",
                q.rel_tol
            );
            return Err(Error::NonConvergence(msg));
        }
        let cur = one_pass(s, rule_for(s, next_panels), variance);
        let mut err = rel_change(prev.mean.re, cur.mean.re);
        if variance {
            err = err.max(rel_change(var_of(&prev), var_of(&cur)));
        }
        if err < q.rel_tol {
            return Ok((cur, err));
        }
        prev = cur;
        panels = next_panels;
    }
}

/// Ghost-image mean <C(rho1)>, A^2.
pub fn mean_c(sys: &SystemConfig, opts: &OracleOptions) -> Result<f64> {
    let s = Scaled::new(sys, opts)?;
    if s.mask.is_zero() {
        return Ok(0.0);
    }
    let (pass, _) = converged_pass(&s, &opts.quadrature, false)?;
    check_real(pass.mean, "mean")?;
    Ok(s.q * s.q * pass.mean.re / (s.t0 * s.t0))
}

fn check_real(z: Complex64, what: &str) -> Result<f64> {
    let r = if z.re == 0.0 {
        if z.im == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (z.im / z.re).abs()
    };
    if r > 1e-10 {
        return Err(Error::Consistency(format!(
            "{what} has relative imaginary part {r:.3e}"
        )));
    }
    Ok(r)
}

/// Variance of C over the averaging time T_I, with the SNR and a per-class ledger.
pub fn variance_c(sys: &SystemConfig, averaging_time: f64, opts: &OracleOptions) -> Result<OracleResult> {
    crate::error::require_positive("correlator.TI", averaging_time)?;
    let t0 = sys.source.coherence_time();
    let need = opts.thresholds.averaging_factor * t0.max(1.0 / sys.detector.omega_b());
    if averaging_time < need {
        return Err(invalid(
            "correlator.TI",
            format!("T_I = {averaging_time:.3e} s is below {need:.3e} s; the lag reduction needs T_I >> T0, 1/Omega_B"),
        ));
    }
    let s = Scaled::new(sys, opts)?;
    let mut warnings = Vec::new();
    if s.mask.is_zero() {
        return Ok(OracleResult {
            mean: 0.0,
            variance: 0.0,
            snr: 0.0,
            term_ledger: TermLedger::default(),
            quadrature_error_estimate: 0.0,
            imaginary_residue: 0.0,
            warnings,
        });
    }
    let (pass, err) = converged_pass(&s, &opts.quadrature, true)?;
    let mut residue = check_real(pass.mean, "mean")?;
    let total: Complex64 = pass.var_terms.iter().map(|t| t.2).sum();
    residue = residue.max(check_real(total, "variance")?);

    // A^4 per unit normalized variance: q^4 / (T0^3 T_I)
    let vscale = s.q.powi(4) / (t0.powi(3) * averaging_time);
    let mut entries: Vec<LedgerEntry> = Vec::new();
    for &(class, mi, v) in &pass.var_terms {
        match entries
            .iter_mut()
            .find(|e| e.class == class && e.mean_intensity == mi)
        {
            Some(e) => {
                e.pairings += 1;
                e.value += v.re * vscale;
            }
            None => entries.push(LedgerEntry {
                class,
                mean_intensity: mi,
                pairings: 1,
                value: v.re * vscale,
            }),
        }
    }
    entries.sort_by_key(|e| (e.class, e.mean_intensity));
    let mean = s.q * s.q * pass.mean.re / (t0 * t0);
    let mut variance = total.re * vscale;
    let floor = -1e-9 * mean * mean;
    if variance < 0.0 {
        if variance < floor {
            return Err(Error::Consistency(format!(
                "negative variance {variance:.3e} A^4 beyond tolerance"
            )));
        }
        warnings.push(format!("variance {variance:.3e} clamped to zero"));
        variance = 0.0;
    }
    Ok(OracleResult {
        mean,
        variance,
        snr: if variance > 0.0 {
            mean * mean / variance
        } else {
            f64::INFINITY
        },
        term_ledger: TermLedger {
            entries,
            background_killed: pass.killed,
            background_value: 0.0,
            mean_product: pass.mean_product,
        },
        quadrature_error_estimate: err,
        imaginary_residue: residue,
        warnings,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NotchReport {
    pub baseline_snr: f64,
    /// (Omega_N, SNR, relative change against Omega_N = 0).
    pub points: Vec<(f64, f64, f64)>,
}

/// How much the notch width moves the oracle SNR, relative to a zero-width notch.
pub fn notch_sensitivity(
    sys: &SystemConfig,
    averaging_time: f64,
    omega_n: &[f64],
    opts: &OracleOptions,
) -> Result<NotchReport> {
    let base_sys = SystemConfig {
        detector: sys.detector.with_omega_n(0.0)?,
        ..*sys
    };
    let base = variance_c(&base_sys, averaging_time, opts)?.snr;
    let mut points = Vec::with_capacity(omega_n.len());
    for &w in omega_n {
        let det = sys.detector.with_omega_n(w)?;
        det.check_against(&sys.source, &opts.thresholds)?;
        let snr = variance_c(&SystemConfig { detector: det, ..*sys }, averaging_time, opts)?.snr;
        points.push((w, snr, (snr - base) / base));
    }
    Ok(NotchReport {
        baseline_snr: base,
        points,
    })
}
