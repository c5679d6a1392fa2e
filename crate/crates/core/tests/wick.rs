use std::f64::consts::PI;

use ghostsnr::acquisition::normalized_side;
use ghostsnr::analytic::{self, Normalized, SnrQuery};
use ghostsnr::wick::*;
use ghostsnr::*;
use proptest::prelude::*;

fn near(kind: SourceKind, i: f64, b: f64, m: f64) -> SystemConfig {
    let n = Normalized {
        area_over_rho_sq: m,
        ..Normalized::figure_defaults(i, b)
    };
    normalized_side(kind, i, b, 1.0, &n).unwrap().system
}

fn far(kind: SourceKind, i: f64, b: f64, m: f64) -> SystemConfig {
    // rho_L = 1, a_L = 1e4
    let src = SourceParams::from_brightness(i, 1.0, 1e-4, 1.0, 1e4, kind).unwrap();
    let det = DetectorParams::new(0.9, b, 0.0, 0.1, [0.0, 0.0]).unwrap();
    let geo = GeometryParams::new(5e3, Propagation::FarField).unwrap();
    SystemConfig::new(src, det, geo, MaskSpec::gaussian_with_area(m).unwrap()).unwrap()
}

fn ti_for(sys: &SystemConfig) -> f64 {
    1e3 * sys.source.coherence_time().max(1.0 / sys.detector.omega_b())
}

fn oracle(sys: &SystemConfig) -> OracleResult {
    variance_c(sys, ti_for(sys), &OracleOptions::default()).unwrap()
}

fn closed(sys: &SystemConfig) -> f64 {
    analytic::snr(&SnrQuery::new(*sys, ti_for(sys)).unwrap()).unwrap().snr
}

#[test]
fn moment_orders_and_pairing_counts() {
    let terms = normal_order(&fourth_moment_factors());
    let orders: Vec<usize> = terms.iter().map(|m| m.order()).collect();
    assert_eq!(orders, vec![8, 6, 6, 4]);
    assert_eq!(enumerate_pairings(&terms[0], SourceKind::Thermal).len(), 24);
    assert_eq!(enumerate_pairings(&terms[3], SourceKind::Thermal).len(), 2);
    for kind in [SourceKind::ClassicalPhaseSensitive, SourceKind::QuantumPhaseSensitive] {
        for t in &terms {
            assert!(enumerate_pairings(t, kind).len() <= 105);
        }
    }
    for t in &terms {
        for p in enumerate_pairings(t, SourceKind::Thermal) {
            assert!(p.pairs.iter().all(|x| x.kind != PairType::PsCross && x.kind != PairType::PsCrossConj));
        }
    }
}

#[test]
fn mean_matches_gaussian_integral() {
    // thermal, near field, Gaussian spot at the axis, pinhole at the axis:
    // <C> = q^2 eta^2 A1 K0^2 * pi/(2/a^2 + 1/rho^2 + 2/w^2) * (1/2pi) int |H|^2 S
    let sys = near(SourceKind::Thermal, 100.0, 10.0, 1e4);
    let s = &sys.source;
    let d = &sys.detector;
    let MaskShape::GaussianSpot { waist } = sys.mask.shape else {
        unreachable!()
    };
    let k0 = 2.0 * s.photon_flux() / (PI * s.beam_radius().powi(2));
    let spatial = PI
        / (2.0 / s.beam_radius().powi(2) + 1.0 / s.coherence_radius().powi(2) + 2.0 / waist.powi(2));
    let t0 = s.coherence_time();
    let wb = d.omega_b();
    // |H|^2 = exp(-4 w^2/wb^2); spectrum of exp(-tau^2/T0^2) is sqrt(pi) T0 exp(-w^2 T0^2/4)
    let temporal = PI.sqrt() * t0 / (2.0 * PI) * (PI / (4.0 / (wb * wb) + t0 * t0 / 4.0)).sqrt();
    let want = d.charge().powi(2) * d.eta().powi(2) * d.pinhole_area() * k0 * k0 * spatial * temporal;
    let got = mean_c(&sys, &OracleOptions::default()).unwrap();
    assert!((got / want - 1.0).abs() < 1e-3, "{got} vs {want}");
}

#[test]
fn opaque_mask_gives_zero_mean() {
    let mut sys = near(SourceKind::Thermal, 1.0, 10.0, 1e4);
    sys.mask = MaskSpec::uniform(0.0).unwrap();
    assert_eq!(mean_c(&sys, &OracleOptions::default()).unwrap(), 0.0);
}

#[test]
fn background_pairings_are_killed() {
    for kind in [SourceKind::Thermal, SourceKind::QuantumPhaseSensitive] {
        let r = oracle(&near(kind, 1.0, 10.0, 1e4));
        assert!(r.term_ledger.background_killed > 0);
        assert_eq!(r.term_ledger.background_value, 0.0);
        assert!(r.term_ledger.mean_product > 0);
    }
}

#[test]
fn ledger_reconstructs_variance() {
    let r = oracle(&near(SourceKind::QuantumPhaseSensitive, 1e-2, 1e-2, 1e4));
    let total = r.term_ledger.total();
    assert!((total / r.variance - 1.0).abs() < 1e-12);
    let by_class: f64 = [NoiseClass::ExcessExcess, NoiseClass::ExcessShot, NoiseClass::ShotShot]
        .iter()
        .map(|&c| r.term_ledger.class_total(c))
        .sum();
    assert!((by_class / r.variance - 1.0).abs() < 1e-12);
    assert!(r.imaginary_residue < 1e-10);
}

#[test]
fn charge_cancels() {
    let sys = near(SourceKind::Thermal, 10.0, 10.0, 1e4);
    let det2 = sys.detector.with_charge(2.0 * sys.detector.charge()).unwrap();
    let sys2 = SystemConfig { detector: det2, ..sys };
    let a = oracle(&sys);
    let b = oracle(&sys2);
    assert!((a.snr / b.snr - 1.0).abs() < 1e-12);
    assert!((b.mean / a.mean / 4.0 - 1.0).abs() < 1e-12);
}

#[test]
fn thermal_narrowband_correlated_variance_tracks_closed_form() {
    // Full variance also carries the mean-intensity shot terms the closed
    // form leaves out; the correlated part is what the closed form describes.
    let sys = near(SourceKind::Thermal, 100.0, 10.0, 1e4);
    let r = oracle(&sys);
    let c = closed(&sys);
    assert!((r.snr_correlated_only() / c - 1.0).abs() < 0.10, "{} vs {c}", r.snr_correlated_only());
    assert!(r.snr < r.snr_correlated_only());
}

#[test]
fn quantum_meets_thermal_when_bright() {
    let q = oracle(&near(SourceKind::QuantumPhaseSensitive, 1e6, 10.0, 1e4));
    let t = oracle(&near(SourceKind::Thermal, 1e6, 10.0, 1e4));
    assert!((q.snr / t.snr - 1.0).abs() < 0.02, "{} vs {}", q.snr, t.snr);
}

#[test]
fn broadband_hump_lives_in_correlated_terms() {
    // The correlated variance shows the low-flux peak. The full variance does
    // not: the pinhole shot noise times the bucket mean intensity swamps it.
    let at = |i: f64| oracle(&near(SourceKind::QuantumPhaseSensitive, i, 1e-2, 1e4));
    let (lo, peak, hi) = (at(1e-4), at(1e-2), at(1e3));
    assert!(peak.snr_correlated_only() > 10.0 * hi.snr_correlated_only());
    assert!(peak.snr_correlated_only() > 10.0 * lo.snr_correlated_only());
    assert!(peak.snr < hi.snr);
    assert!(lo.snr <= peak.snr);
}

#[test]
fn classical_ps_near_field_equals_thermal() {
    let th = near(SourceKind::Thermal, 3.0, 10.0, 1e4);
    let ps = th.with_source(th.source.with_kind(SourceKind::ClassicalPhaseSensitive));
    let a = oracle(&th);
    let b = oracle(&ps);
    assert!((a.snr / b.snr - 1.0).abs() < 1e-9, "{} vs {}", a.snr, b.snr);
}

#[test]
fn far_field_equals_near_field_with_detection_radii() {
    let f = far(SourceKind::Thermal, 10.0, 10.0, 1e4);
    let (a_l, rho_l) = f.geometry.far_field_radii(&f.source);
    let s = f.source;
    let src = SourceParams::new(s.photon_flux(), a_l, rho_l, s.coherence_time(), 1e4, s.kind()).unwrap();
    let geo = GeometryParams::new(1e-6, Propagation::NearField).unwrap();
    let n = SystemConfig::new(src, f.detector, geo, f.mask).unwrap();
    let a = oracle(&f);
    let b = oracle(&n);
    assert!((a.snr / b.snr - 1.0).abs() < 1e-6, "{} vs {}", a.snr, b.snr);
}

#[test]
fn notch_width_barely_matters() {
    let sys = near(SourceKind::Thermal, 10.0, 10.0, 1e4);
    let ti = ti_for(&sys);
    let r = notch_sensitivity(&sys, ti, &[0.01, 0.1], &OracleOptions::default()).unwrap();
    assert!(r.points[0].2.abs() < 0.01, "{:?}", r.points);
    assert!(r.points[1].2.abs() < 0.05, "{:?}", r.points);
    let wb = sys.detector.omega_b();
    assert!(notch_sensitivity(&sys, ti, &[wb], &OracleOptions::default()).is_err());
}

#[test]
fn short_averaging_time_rejected() {
    let sys = near(SourceKind::Thermal, 10.0, 10.0, 1e4);
    assert!(variance_c(&sys, 10.0, &OracleOptions::default()).is_err());
}

#[test]
fn oversized_pinhole_rejected() {
    let mut sys = near(SourceKind::Thermal, 10.0, 10.0, 1e4);
    sys.detector = DetectorParams::new(0.9, 10.0, 0.0, 2.0, [0.0, 0.0]).unwrap();
    assert!(mean_c(&sys, &OracleOptions::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn variance_positive_and_real(
        k in 0usize..3,
        li in -4.0..4.0f64,
        narrow in any::<bool>(),
        lm in 2.0..4.0f64,
    ) {
        let kind = [SourceKind::Thermal, SourceKind::ClassicalPhaseSensitive, SourceKind::QuantumPhaseSensitive][k];
        let b = if narrow { 10.0 } else { 0.1 };
        let r = oracle(&near(kind, 10f64.powf(li), b, 10f64.powf(lm)));
        prop_assert!(r.variance > 0.0);
        prop_assert!(r.mean > 0.0);
        prop_assert!(r.imaginary_residue < 1e-10);
        prop_assert!(r.snr.is_finite());
    }
}
