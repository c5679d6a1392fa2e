use std::f64::consts::PI;

use approx::assert_relative_eq;
use ghostsnr::model::{eval_kernel, quantum_excess_weight};
use ghostsnr::*;
use proptest::prelude::*;

fn src(kind: SourceKind) -> SourceParams {
    SourceParams::new(1e12, 1e-4, 1e-6, 1e-9, 1e7, kind).unwrap()
}

fn det(omega_b: f64) -> DetectorParams {
    DetectorParams::new(0.9, omega_b, 0.0, 1e-13, [0.0, 0.0]).unwrap()
}

#[test]
fn brightness_from_definition() {
    let s = src(SourceKind::Thermal);
    assert_relative_eq!(brightness(&s).value(), 0.1, max_relative = 1e-12);
    let s2 = s.with_photon_flux(2e12).unwrap();
    assert_relative_eq!(brightness(&s2).value(), 0.2, max_relative = 1e-12);
}

#[test]
fn coherence_radius_equal_to_beam_rejected() {
    let e = SourceParams::new(1e12, 1e-4, 1e-4, 1e-9, 1e7, SourceKind::Thermal).unwrap_err();
    assert!(matches!(e, Error::InvalidParameter { field: "source.rho0", .. }));
}

#[test]
fn nonpositive_inputs_rejected() {
    assert!(SourceParams::new(0.0, 1e-4, 1e-6, 1e-9, 1e7, SourceKind::Thermal).is_err());
    assert!(SourceParams::new(1.0, 1e-4, 1e-6, -1.0, 1e7, SourceKind::Thermal).is_err());
    assert!(DetectorParams::new(0.0, 1.0, 0.0, 1.0, [0.0; 2]).is_err());
    assert!(DetectorParams::new(1.1, 1.0, 0.0, 1.0, [0.0; 2]).is_err());
    assert!(GeometryParams::new(0.0, Propagation::NearField).is_err());
}

#[test]
fn thermal_intermediate_fresnel() {
    let s = SourceParams::new(1e12, 1e-2, 1e-4, 1e-9, 1e7, SourceKind::Thermal).unwrap();
    let g = GeometryParams::new(1.0, Propagation::NearField).unwrap();
    let r = classify_regime(&s, &g, &det(1e10));
    assert_relative_eq!(r.near_field_number, 5.0, max_relative = 1e-12);
    assert_eq!(r.propagation, Propagation::Intermediate);
}

#[test]
fn band_boundaries_inclusive() {
    let s = src(SourceKind::Thermal);
    let g = GeometryParams::new(1e-3, Propagation::NearField).unwrap();
    assert_eq!(classify_regime(&s, &g, &det(10.0 / 1e-9)).band, Band::Narrowband);
    assert_eq!(classify_regime(&s, &g, &det(0.1 / 1e-9)).band, Band::Broadband);
    assert_eq!(classify_regime(&s, &g, &det(1.0 / 1e-9)).band, Band::Intermediate);
}

#[test]
fn phase_sensitive_far_field() {
    let s = SourceParams::new(1e12, 1e-4, 1e-6, 1e-9, 1e7, SourceKind::ClassicalPhaseSensitive).unwrap();
    let g = GeometryParams::new(10.0, Propagation::FarField).unwrap();
    let r = classify_regime(&s, &g, &det(1e10));
    assert_relative_eq!(r.far_field_number, 5e-3, max_relative = 1e-12);
    assert_eq!(r.propagation, Propagation::FarField);
}

#[test]
fn far_field_radii() {
    let s = src(SourceKind::Thermal);
    let g = GeometryParams::new(10.0, Propagation::FarField).unwrap();
    let (a_l, rho_l) = g.far_field_radii(&s);
    assert_relative_eq!(a_l, 2.0, max_relative = 1e-12);
    assert_relative_eq!(rho_l, 0.02, max_relative = 1e-12);
    assert_relative_eq!(rho_l / a_l, 1e-2, max_relative = 1e-12);
}

#[test]
fn near_field_leaves_kernel_alone() {
    let k = CorrelationKernel::auto(src(SourceKind::Thermal));
    let g = GeometryParams::new(1e-3, Propagation::NearField).unwrap();
    let d = to_detection_plane(&k, &g).unwrap();
    assert_eq!(d.terms(), k.terms());
    let dd = to_detection_plane(&d, &g).unwrap();
    assert_eq!(dd, d);
}

#[test]
fn intermediate_propagation_unsupported() {
    let k = CorrelationKernel::auto(src(SourceKind::Thermal));
    let g = GeometryParams::new(1.0, Propagation::Intermediate).unwrap();
    assert!(matches!(to_detection_plane(&k, &g), Err(Error::UnsupportedRegime(_))));
}

#[test]
fn far_field_brightness_preserved() {
    let s = src(SourceKind::Thermal);
    let g = GeometryParams::new(10.0, Propagation::FarField).unwrap();
    let (a_l, rho_l) = g.far_field_radii(&s);
    let i_l = s.photon_flux() * s.coherence_time() * (rho_l / a_l).powi(2);
    assert_relative_eq!(i_l, brightness(&s).value(), max_relative = 1e-12);
}

#[test]
fn far_field_kernel_conserves_power() {
    // peak 2P/(pi a_L^2) at the detection plane
    let s = src(SourceKind::Thermal);
    let g = GeometryParams::new(10.0, Propagation::FarField).unwrap();
    let k = to_detection_plane(&CorrelationKernel::auto(s), &g).unwrap();
    let (a_l, _) = g.far_field_radii(&s);
    let v = eval_kernel(&k, [0.0; 2], 0.0, [0.0; 2], 0.0);
    assert_relative_eq!(v.re, 2.0 * s.photon_flux() / (PI * a_l * a_l), max_relative = 1e-12);
}

#[test]
fn phase_sensitive_far_field_kernel_inverted() {
    let s = src(SourceKind::ClassicalPhaseSensitive);
    let g = GeometryParams::new(10.0, Propagation::FarField).unwrap();
    let k = to_detection_plane(&CorrelationKernel::cross(s), &g).unwrap();
    let x = [0.05, -0.02];
    let peak = eval_kernel(&k, x, 0.0, [-x[0], -x[1]], 0.0).norm();
    let same = eval_kernel(&k, x, 0.0, x, 0.0).norm();
    assert!(peak > 10.0 * same);
}

#[test]
fn auto_kernel_peak() {
    let s = src(SourceKind::Thermal);
    let v = eval_kernel(&CorrelationKernel::auto(s), [0.0; 2], 0.0, [0.0; 2], 0.0);
    assert_relative_eq!(v.re, 2.0 * 1e12 / (PI * 1e-8), max_relative = 1e-12);
    assert_eq!(v.im, 0.0);
}

#[test]
fn thermal_cross_equals_auto() {
    let s = src(SourceKind::Thermal);
    let a = CorrelationKernel::auto(s);
    let c = CorrelationKernel::cross(s);
    for (x1, x2, dt) in [([0.0, 0.0], [1e-6, 0.0], 0.0), ([2e-5, 1e-5], [1e-5, -3e-6], 5e-10)] {
        assert_eq!(eval_kernel(&a, x1, 0.0, x2, dt), eval_kernel(&c, x1, 0.0, x2, dt));
    }
}

#[test]
fn quantum_excess_term_dominates_at_low_brightness() {
    let s = SourceParams::from_brightness(1e-4, 1e-4, 1e-6, 1e-9, 1e7, SourceKind::QuantumPhaseSensitive).unwrap();
    let w = quantum_excess_weight(&s);
    assert_relative_eq!(w, (2.0 / PI).powf(0.25) / 1e-2, max_relative = 1e-12);
    assert!((w - 89.3).abs() < 0.1);
}

fn sample_point() -> impl Strategy<Value = ([f64; 2], [f64; 2], f64)> {
    (
        prop::array::uniform2(-2e-5..2e-5f64),
        prop::array::uniform2(-2e-5..2e-5f64),
        -3e-9..3e-9f64,
    )
}

proptest! {
    #[test]
    fn kernels_peak_at_coincidence(((x1, x2, dt), kind) in (sample_point(), prop_oneof![
        Just(SourceKind::Thermal),
        Just(SourceKind::ClassicalPhaseSensitive),
        Just(SourceKind::QuantumPhaseSensitive),
    ])) {
        let s = src(kind);
        for k in [CorrelationKernel::auto(s), CorrelationKernel::cross(s)] {
            let off = eval_kernel(&k, x1, 0.0, x2, dt).norm();
            let on = eval_kernel(&k, x1, 0.0, x1, 0.0).norm();
            prop_assert!(off <= on * (1.0 + 1e-12));
        }
    }

    #[test]
    fn classical_cross_bounded_by_autos((x1, x2, dt) in sample_point(), ps in any::<bool>()) {
        let kind = if ps { SourceKind::ClassicalPhaseSensitive } else { SourceKind::Thermal };
        let s = src(kind);
        let a = CorrelationKernel::auto(s);
        let c = CorrelationKernel::cross(s);
        let lhs = eval_kernel(&c, x1, 0.0, x2, dt).norm_sqr();
        let rhs = eval_kernel(&a, x1, 0.0, x1, 0.0).re * eval_kernel(&a, x2, dt, x2, dt).re;
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn quantum_cross_breaks_classical_bound(i in 1e-6..0.05f64, x in prop::array::uniform2(-2e-5..2e-5f64)) {
        let s = SourceParams::from_brightness(i, 1e-4, 1e-6, 1e-9, 1e7, SourceKind::QuantumPhaseSensitive).unwrap();
        let a = CorrelationKernel::auto(s);
        let c = CorrelationKernel::cross(s);
        let lhs = eval_kernel(&c, x, 0.0, x, 0.0).norm_sqr();
        let rhs = eval_kernel(&a, x, 0.0, x, 0.0).re.powi(2);
        prop_assert!(lhs / rhs > 1.0);
    }

    #[test]
    fn far_field_keeps_radius_ratio(l in 1.0..1e3f64, k0 in 1e6..1e8f64) {
        let s = SourceParams::new(1e12, 1e-4, 1e-6, 1e-9, k0, SourceKind::Thermal).unwrap();
        let g = GeometryParams::new(l, Propagation::FarField).unwrap();
        let (a_l, rho_l) = g.far_field_radii(&s);
        prop_assert!((rho_l / a_l / 1e-2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn brightness_linear_in_flux(p in 1e3..1e18f64, f in 0.1..10.0f64) {
        let s = SourceParams::new(p, 1e-4, 1e-6, 1e-9, 1e7, SourceKind::Thermal).unwrap();
        let s2 = s.with_photon_flux(p * f).unwrap();
        prop_assert!((brightness(&s2).value() / brightness(&s).value() / f - 1.0).abs() < 1e-12);
    }
}
