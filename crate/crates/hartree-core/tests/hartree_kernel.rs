mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::{dawson, hartree_energy_mc, simpson};
use hartree_core::ground_state::random_smooth_field;
use hartree_core::hartree::{self, kernel};
use hartree_core::{functionals, ComplexRadialField, LabError, ModelParams, RadialGrid};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid(d: usize, a: f64, n: usize, r_max: f64) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::new(ModelParams::new(d, a).unwrap(), n, r_max).unwrap())
}

/// Sphere average of |x-y|^{-2} by brute-force Simpson in the polar angle.
fn sphere_average(d: usize, r: f64, s: f64) -> f64 {
    let p = d as i32 - 2;
    let m = 200_000;
    let num = simpson(|th| th.sin().powi(p) / (r * r + s * s - 2.0 * r * s * th.cos()), 0.0, PI, m);
    let den = simpson(|th| th.sin().powi(p), 0.0, PI, m);
    num / den
}

#[test]
fn closed_form_kernel_values() {
    assert!((kernel(4, 2.0, 1.0).unwrap() - 0.25).abs() < 1e-15);
    assert!((kernel(4, 1.0, 2.0).unwrap() - 0.25).abs() < 1e-15);
    let k3 = kernel(3, 2.0, 1.0).unwrap();
    assert!((k3 - 0.25 * 3f64.ln()).abs() < 1e-15);
    assert!((k3 - 0.27465).abs() < 1e-5);
    // d = 6: 2F1(1, -1; 3; t) = 1 - t/3
    let k6 = kernel(6, 1.0, 2.0).unwrap();
    assert!((k6 - (1.0 - 0.25 / 3.0) / 4.0).abs() < 1e-15);
}

#[test]
fn kernel_rejects_diagonal_and_bad_input() {
    assert!(matches!(kernel(3, 1.5, 1.5), Err(LabError::KernelDiagonal(_))));
    assert!(kernel(2, 1.0, 2.0).is_err());
    assert!(kernel(3, 0.0, 2.0).is_err());
}

#[test]
fn kernel_matches_brute_force_sphere_average() {
    for d in 3..=8 {
        for (r, s) in [(1.0, 0.3), (0.7, 1.0), (1.0, 0.55), (2.0, 1.9), (0.1, 3.0)] {
            let got = kernel(d, r, s).unwrap();
            let want = sphere_average(d, r, s);
            assert!((got - want).abs() < 1e-7 * want, "d={d} r={r} s={s}: {got} vs {want}");
        }
    }
}

#[test]
fn zero_density_gives_zero_potential() {
    let g = grid(3, -0.1, 64, 8.0);
    let phi = hartree::potential(&ComplexRadialField::zeros(g.clone()));
    assert!(phi.iter().all(|&p| p == 0.0));
    assert_eq!(hartree::lv_value(&ComplexRadialField::zeros(g)), 0.0);
}

#[test]
fn gaussian_potential_is_dawson_profile() {
    // |u|^2 = e^{-|y|^2} in d = 3: Phi(r) = 2 pi^{3/2} F(r) / r
    let g = grid(3, 0.0, 256, 10.0);
    let u = ComplexRadialField::from_real_fn(g.clone(), |r| (-0.5 * r * r).exp()).unwrap();
    let phi = hartree::potential(&u);
    let mut worst: f64 = 0.0;
    for (r, p) in g.nodes.iter().zip(&phi) {
        let exact = 2.0 * PI.powf(1.5) * dawson(*r) / r;
        worst = worst.max((p - exact).abs() / exact);
    }
    assert!(worst < 1e-7, "{worst:e}");
    // near the origin the potential approaches int |u|^2 / |y|^2
    let at_origin = functionals::inverse_square(&u);
    assert!((phi[0] - at_origin).abs() < 1e-2 * at_origin);
    assert!((at_origin - 2.0 * PI.powf(1.5)).abs() < 1e-9 * at_origin);
}

#[test]
fn thin_shell_in_four_dimensions() {
    let g = grid(4, -0.5, 512, 8.0);
    let (s0, eps) = (2.0, 0.12);
    let dens = |s: f64| (-(s - s0).powi(2) / (2.0 * eps * eps)).exp();
    let u = ComplexRadialField::from_real_fn(g.clone(), |r| dens(r).sqrt()).unwrap();
    let phi = hartree::potential(&u);
    let om = 2.0 * PI * PI;
    let total = om * simpson(|s| dens(s) * s.powi(3), 0.0, 4.0, 40_000);
    for (r, p) in g.nodes.iter().zip(&phi) {
        let exact = om * simpson(|s| dens(s) * s.powi(3) / r.max(s).powi(2), 0.0, 4.0, 40_000);
        assert!((p - exact).abs() < 1e-6 * exact, "r={r}: {p} vs {exact}");
        if (r - s0).abs() > 6.0 * eps {
            let shell = total / r.max(s0).powi(2);
            // finite width: s0^2 <s^{-2}> = 1 - 3 (eps/s0)^2 + ...
            assert!((p - shell).abs() < 4.0 * (eps / s0).powi(2) * shell, "r={r}");
        }
    }
}

#[test]
fn hartree_energy_matches_monte_carlo() {
    let g = grid(3, -0.1, 512, 10.0);
    let rho = g.params.rho;
    let bump = |r: f64| (-(r - 0.8f64).powi(2) / 0.72).exp() + (-(r + 0.8f64).powi(2) / 0.72).exp();
    let u = functionals::natural_profile(g.clone(), bump).unwrap();
    let lv = hartree::lv_value(&u);
    let (mc, se) = hartree_energy_mc(3, move |r| r.powf(-rho) * bump(r), 1.0, 1.0, 2_000_000, 5);
    assert!((lv - mc).abs() < 3.0 * se, "grid {lv}, mc {mc} +- {se}");
    assert!(se < 1e-2 * lv);
}

#[test]
fn quadratic_form_agrees_with_its_transpose() {
    let g = grid(3, -0.1, 256, 10.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let u = random_smooth_field(&g, &mut rng, true).unwrap();
        let a = hartree::lv_value(&u);
        let b = hartree::lv_value_transposed(&u);
        assert!((a - b).abs() < 1e-6 * a, "{a} {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_symmetric_positive(d in 3usize..9, r in 0.01f64..5.0, s in 0.01f64..5.0) {
        prop_assume!((r - s).abs() > 1e-6);
        let a = kernel(d, r, s).unwrap();
        let b = kernel(d, s, r).unwrap();
        prop_assert!(a > 0.0);
        prop_assert!((a - b).abs() <= 1e-12 * a);
        // 2F1(1, 2 - d/2; d/2; t) is >= 1 for d = 3, == 1 for d = 4, <= 1 above
        let f = a * r.max(s).powi(2);
        match d {
            3 => prop_assert!(f >= 1.0 - 1e-12),
            4 => prop_assert!((f - 1.0).abs() < 1e-12),
            _ => prop_assert!(f <= 1.0 + 1e-12),
        }
    }

    #[test]
    fn potential_nonnegative(seed in 0u64..1000) {
        let g = grid(3, -0.1, 64, 8.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_smooth_field(&g, &mut rng, true).unwrap();
        prop_assert!(hartree::potential(&u).iter().all(|&p| p >= 0.0));
    }
}
