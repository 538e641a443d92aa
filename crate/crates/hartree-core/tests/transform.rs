use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use hartree_core::{ModelParams, RadialGrid};
use num_complex::Complex64;
use proptest::prelude::*;

fn grid(d: usize, a: f64, n: usize, r_max: f64) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::new(ModelParams::new(d, a).unwrap(), n, r_max).unwrap())
}

fn shared() -> &'static Arc<RadialGrid> {
    static G: OnceLock<Arc<RadialGrid>> = OnceLock::new();
    G.get_or_init(|| grid(3, -0.1, 128, 10.0))
}

fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

#[test]
fn monomial_volume() {
    for (d, a) in [(3, 0.0), (3, -0.2), (4, -0.5), (5, 1.0)] {
        let g = grid(d, a, 64, 3.0);
        let exact = 3f64.powi(d as i32) / d as f64;
        let got = g.integrate_fn(|_| 1.0);
        assert!((got - exact).abs() < 1e-12 * exact, "d={d}: {got} vs {exact}");
    }
}

#[test]
fn gaussian_moment_by_node_weights() {
    let g = grid(3, 0.0, 256, 8.0);
    let f: Vec<f64> = g.nodes.iter().map(|r| (-r * r).exp()).collect();
    let got = g.integrate_nodes(&f);
    assert!((got - PI.sqrt() / 4.0).abs() < 1e-8, "{got}");
}

#[test]
fn nodes_positive_and_increasing() {
    for (d, a) in [(3, -0.2475), (3, 0.0), (4, -0.9), (6, 2.0)] {
        for n in [16, 40, 200] {
            let g = grid(d, a, n, 5.0);
            assert!(g.nodes[0] > 0.0);
            assert!(g.nodes.windows(2).all(|w| w[1] > w[0]));
            assert!(*g.nodes.last().unwrap() < 5.0);
            assert!(g.weights.iter().all(|&w| w > 0.0));
        }
    }
}

#[test]
fn too_few_nodes_rejected() {
    assert!(RadialGrid::new(ModelParams::new(3, 0.0).unwrap(), 8, 5.0).is_err());
    assert!(RadialGrid::new(ModelParams::new(3, 0.0).unwrap(), 32, -1.0).is_err());
}

#[test]
fn zero_field_has_zero_coefficients() {
    let g = shared();
    let c = g.forward(&vec![Complex64::new(0.0, 0.0); g.n]);
    assert!(c.iter().all(|z| z.norm() == 0.0));
}

#[test]
fn lowest_mode_maps_to_first_unit_vector() {
    let g = shared();
    let c = g.forward_real(&g.mode(0));
    assert!((c[0] - 1.0).abs() < 1e-12);
    assert!(c[1..].iter().all(|x| x.abs() < 1e-12));
}

#[test]
fn modes_are_eigenvectors() {
    let g = shared();
    for m in [0, 5, 77, g.n - 1] {
        let v = g.mode(m);
        let lv = g.apply_la_real(&v);
        let k2 = g.k2(m);
        let err = lv.iter().zip(&v).map(|(a, b)| (a - k2 * b).abs()).fold(0.0, f64::max);
        let scale = v.iter().map(|x| x.abs()).fold(0.0, f64::max) * k2;
        assert!(err < 1e-10 * scale, "mode {m}: {err:e}");
    }
}

#[test]
fn first_eigenvalue_is_dirichlet_bessel_zero() {
    // d=5, a=0: nu = 3/2, first zero of J_{3/2} is the first root of tan x = x
    let g = grid(5, 0.0, 32, 2.0);
    let x0: f64 = 4.493409457909064;
    assert!((g.k2(0) - (x0 / 2.0).powi(2)).abs() < 1e-12);
}

#[test]
fn free_laplacian_of_gaussian() {
    let g = grid(3, 0.0, 256, 10.0);
    let u: Vec<f64> = g.nodes.iter().map(|r| (-0.5 * r * r).exp()).collect();
    let lu = g.apply_la_real(&u);
    let err = g
        .nodes
        .iter()
        .zip(&lu)
        .map(|(r, v)| (v - (3.0 - r * r) * (-0.5 * r * r).exp()).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-9, "{err:e}");
}

#[test]
fn radial_derivative_of_gaussian() {
    let g = grid(3, 0.0, 256, 10.0);
    let u: Vec<Complex64> = g.nodes.iter().map(|r| Complex64::new((-0.5 * r * r).exp(), 0.0)).collect();
    let du = g.derivative(&u);
    let err = g
        .nodes
        .iter()
        .zip(&du)
        .map(|(r, v)| (v - Complex64::new(-r * (-0.5 * r * r).exp(), 0.0)).norm())
        .fold(0.0, f64::max);
    assert!(err < 1e-8, "{err:e}");
}

#[test]
fn derivative_of_singular_profile() {
    // u = r^{-rho} e^{-r^2}: u' = (-rho/r - 2r) u
    let g = grid(3, -0.2, 256, 8.0);
    let rho = g.params.rho;
    let u: Vec<Complex64> = g.nodes.iter().map(|r| Complex64::new(r.powf(-rho) * (-r * r).exp(), 0.0)).collect();
    let du = g.derivative(&u);
    let exact: Vec<Complex64> =
        g.nodes.iter().zip(&u).map(|(r, z)| z * (-rho / r - 2.0 * r)).collect();
    // relative in the weighted norm that enters the gradient energy
    let num: f64 = du.iter().zip(&exact).zip(&g.weights).map(|((a, b), w)| w * (a - b).norm_sqr()).sum();
    let den: f64 = exact.iter().zip(&g.weights).map(|(b, w)| w * b.norm_sqr()).sum();
    assert!((num / den).sqrt() < 1e-6, "{:e}", (num / den).sqrt());
}

#[test]
fn evaluate_at_reproduces_nodes_and_vanishes_outside() {
    let g = shared();
    let u: Vec<Complex64> = g
        .nodes
        .iter()
        .map(|r| Complex64::new((-r * r).exp(), r * (-r * r).exp()) * r.powf(-g.params.rho))
        .collect();
    let back = g.evaluate_at(&u, &g.nodes);
    assert!(rel_err(&back, &u) < 1e-13);
    let out = g.evaluate_at(&u, &[g.r_max, 2.0 * g.r_max, -1.0]);
    assert!(out.iter().all(|z| z.norm() == 0.0));
}

fn field_strategy(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

fn inner(g: &RadialGrid, a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).zip(&g.weights).map(|((x, y), w)| x.conj() * y * *w).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn round_trip(u in field_strategy(128)) {
        let g = shared();
        let back = g.inverse(&g.forward(&u));
        prop_assert!(rel_err(&back, &u) < 1e-10);
    }

    #[test]
    fn operator_is_self_adjoint_and_positive(u in field_strategy(128), v in field_strategy(128)) {
        let g = shared();
        let lu = g.apply_la(&u);
        let lv = g.apply_la(&v);
        let a = inner(g, &lu, &v);
        let b = inner(g, &u, &lv);
        let scale = inner(g, &lu, &lu).re.sqrt() * inner(g, &v, &v).re.sqrt();
        prop_assert!((a - b).norm() < 1e-9 * scale);
        let q = inner(g, &u, &lu);
        prop_assert!(q.re > 0.0);
        prop_assert!(q.im.abs() < 1e-9 * q.re);
    }

    #[test]
    fn parseval(u in field_strategy(128)) {
        let g = shared();
        let c = g.forward(&u);
        let lhs: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        let rhs = inner(g, &u, &u).re;
        prop_assert!((lhs - rhs).abs() < 1e-12 * rhs);
    }
}
