use hartree_core::params::{sphere_area, ModelParams};
use hartree_core::LabError;
use proptest::prelude::*;
use std::f64::consts::PI;

#[test]
fn free_case_has_trivial_exponents() {
    let p = ModelParams::new(3, 0.0).unwrap();
    assert_eq!(p.rho, 0.0);
    assert_eq!(p.nu, 0.5);
}

#[test]
fn closed_form_exponents() {
    let p = ModelParams::new(4, -0.75).unwrap();
    assert!((p.rho - 0.5).abs() < 1e-15 && (p.nu - 0.5).abs() < 1e-15);
    let p = ModelParams::new(3, -0.2475).unwrap();
    assert!((p.nu - 0.05).abs() < 1e-12, "nu = {}", p.nu);
    assert!((p.rho - 0.45).abs() < 1e-12, "rho = {}", p.rho);
}

#[test]
fn coupling_below_hardy_threshold_is_rejected_with_bound() {
    match ModelParams::new(3, -1.0) {
        Err(LabError::InvalidParams(msg)) => assert!(msg.contains("-0.25"), "{msg}"),
        other => panic!("expected InvalidParams, got {other:?}"),
    }
    // the threshold itself is excluded
    assert!(ModelParams::new(3, -0.25).is_err());
    assert!(ModelParams::new(5, -2.25).is_err());
    assert!(ModelParams::new(5, -2.2499).is_ok());
}

#[test]
fn bad_dimension_or_coupling_rejected() {
    assert!(matches!(ModelParams::new(2, 0.0), Err(LabError::InvalidParams(_))));
    assert!(matches!(ModelParams::new(3, f64::NAN), Err(LabError::InvalidParams(_))));
    assert!(matches!(ModelParams::new(3, f64::INFINITY), Err(LabError::InvalidParams(_))));
}

#[test]
fn sphere_areas() {
    assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
    assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
    assert!((ModelParams::new(6, 0.3).unwrap().sphere_area() - PI.powi(3)).abs() < 1e-12);
}

proptest! {
    #[test]
    fn exponent_relations(d in 3usize..9, frac in 0.001f64..3.0) {
        let h = (d as f64 - 2.0) / 2.0;
        let a = ModelParams::a_min(d) + frac * h * h;
        let p = ModelParams::new(d, a).unwrap();
        prop_assert!(p.nu > 0.0);
        prop_assert!((p.rho + p.nu - h).abs() < 1e-12);
        prop_assert!((p.nu * p.nu - h * h - a).abs() < 1e-11 * (1.0 + a.abs()));
        // rho > 0 exactly when the potential is attractive
        prop_assert_eq!(p.rho > 0.0, a < 0.0);
    }
}
