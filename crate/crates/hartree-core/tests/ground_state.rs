use std::sync::{Arc, OnceLock};

use hartree_core::evolution::{step, Scheme};
use hartree_core::functionals;
use hartree_core::ground_state::*;
use hartree_core::{ComplexRadialField, LabError, ModelParams, RadialGrid};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid(d: usize, a: f64, n: usize, r_max: f64) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::new(ModelParams::new(d, a).unwrap(), n, r_max).unwrap())
}

struct Case {
    grid: Arc<RadialGrid>,
    gs: GroundStateResult,
}

fn case() -> &'static Case {
    static C: OnceLock<Case> = OnceLock::new();
    C.get_or_init(|| {
        let grid = grid(3, -0.1, 512, 12.0);
        let gs = solve_ground_state(&grid, &GroundStateOptions::default()).unwrap();
        Case { grid, gs }
    })
}

#[test]
fn pohozaev_chain() {
    let gs = &case().gs;
    let [hl, ml, mh] = gs.pohozaev();
    assert!(hl < 1e-6 && ml < 1e-6 && mh < 1e-6, "{:?}", gs.pohozaev());
    assert!(gs.residual < 1e-6);
    assert!(gs.q.values().iter().all(|z| z.re >= 0.0 && z.im == 0.0));
    // J(Q) is M_gs by definition
    let j = functionals::functionals(&gs.q).unwrap().j.unwrap();
    assert!((j / gs.m_gs - 1.0).abs() < 1e-8);
}

#[test]
fn descent_stage_is_monotone() {
    let gs = &case().gs;
    let descent = &gs.trace[..gs.descent_len];
    assert!(descent.windows(2).all(|w| w[1].1 <= w[0].1));
}

#[test]
fn initial_guesses_agree() {
    let c = case();
    let opts = GroundStateOptions { initial: InitialGuess::Sech, ..Default::default() };
    let other = solve_ground_state(&c.grid, &opts).unwrap();
    assert!((other.m_gs / c.gs.m_gs - 1.0).abs() < 1e-6);
    assert!("sech".parse::<InitialGuess>().unwrap() == InitialGuess::Sech);
    assert!("lorentzian".parse::<InitialGuess>().is_err());
}

#[test]
fn residual_separates_solution_from_gaussian() {
    let c = case();
    assert!(el_residual(&c.gs.q).unwrap() < 1e-6);
    let g = functionals::natural_profile(c.grid.clone(), |r| (-0.5 * r * r).exp()).unwrap();
    let r = el_residual(&g).unwrap();
    assert!(r > 0.05, "{r}");
}

#[test]
fn perturbation_deficit_is_quadratic() {
    let c = case();
    let bump = functionals::natural_profile(c.grid.clone(), |r| (-(r - 1.5f64).powi(2)).exp()).unwrap();
    let deficit = |eps: f64| {
        let v: Vec<Complex64> = c.gs.q.values().iter().zip(bump.values()).map(|(a, b)| a + eps * b).collect();
        let u = ComplexRadialField::new(c.grid.clone(), v).unwrap();
        functionals::functionals(&u).unwrap().j.unwrap() - c.gs.m_gs
    };
    let d1 = deficit(1e-2);
    let d2 = deficit(5e-3);
    assert!(d1 > 0.0 && d2 > 0.0);
    let ratio = d1 / d2;
    assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
}

#[test]
fn random_fields_respect_sharp_constant() {
    let c = case();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let fields: Vec<_> = (0..20).map(|_| random_smooth_field(&c.grid, &mut rng, true).unwrap()).collect();
    let report = gn_audit(&fields, c.gs.m_gs);
    assert_eq!(report.violations, 0);
    assert!(report.min_ratio > 1.0);
    // Q itself sits exactly on the threshold and is not a violation
    let at_q = gn_audit(std::slice::from_ref(&c.gs.q), c.gs.m_gs);
    assert_eq!(at_q.violations, 0);
    assert!((at_q.min_ratio - 1.0).abs() < 1e-8);
}

#[test]
fn random_fields_are_seed_deterministic() {
    let c = case();
    let a = random_smooth_field(&c.grid, &mut ChaCha8Rng::seed_from_u64(5), true).unwrap();
    let b = random_smooth_field(&c.grid, &mut ChaCha8Rng::seed_from_u64(5), true).unwrap();
    assert_eq!(a.values(), b.values());
}

#[test]
fn iteration_budget_exhaustion_reports_trace() {
    let g = grid(3, -0.1, 128, 12.0);
    let opts = GroundStateOptions { max_iter: 5, ..Default::default() };
    match solve_ground_state(&g, &opts) {
        Err(LabError::NoConvergence { iterations, trace, .. }) => {
            assert_eq!(iterations, 5);
            assert!(!trace.is_empty());
        }
        other => panic!("expected NoConvergence, got {:?}", other.map(|r| r.m_gs)),
    }
}

#[test]
fn zero_start_collapses() {
    let g = grid(3, -0.1, 64, 12.0);
    assert!(matches!(
        solve_from(&g, vec![0.0; 64], &GroundStateOptions::default()),
        Err(LabError::Collapse)
    ));
}

#[test]
fn threshold_depends_on_coupling_monotonically() {
    // a more attractive inverse-square potential lowers the threshold mass
    let lo = solve_ground_state(&grid(3, -0.2, 256, 12.0), &GroundStateOptions::default()).unwrap();
    let mid = solve_ground_state(&grid(3, -0.1, 256, 12.0), &GroundStateOptions::default()).unwrap();
    let hi = solve_ground_state(&grid(3, 0.1, 256, 12.0), &GroundStateOptions::default()).unwrap();
    assert!(lo.m_gs < mid.m_gs && mid.m_gs < hi.m_gs);
}

#[test]
fn ground_state_is_a_standing_wave() {
    // Q evolves as e^{-it} Q under the chosen sign convention
    let c = case();
    let dt = 1e-3;
    let mut u = c.gs.q.clone();
    for _ in 0..100 {
        u = step(&u, dt, Scheme::StrangSplit).unwrap();
    }
    let t = 0.1;
    let phase = Complex64::from_polar(1.0, -t);
    let num: f64 = u
        .values()
        .iter()
        .zip(c.gs.q.values())
        .zip(&c.grid.weights)
        .map(|((a, q), w)| w * (a - phase * q).norm_sqr())
        .sum();
    let den: f64 = c.gs.q.values().iter().zip(&c.grid.weights).map(|(q, w)| w * q.norm_sqr()).sum();
    assert!((num / den).sqrt() < 1e-5, "{:e}", (num / den).sqrt());
    let h0 = c.gs.quantities.h;
    let h = functionals::functionals(&u).unwrap().h;
    assert!((h / h0 - 1.0).abs() < 1e-6);
}
