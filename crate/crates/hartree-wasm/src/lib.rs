//! Browser demo bindings. Every export takes plain numbers and returns a
//! JSON string, so the same functions run (and are tested) natively.

use std::sync::Arc;

use hartree_core::evolution::{self, IntegratorConfig, ThetaProfile};
use hartree_core::functionals::{self, natural_profile};
use hartree_core::ground_state::{self, GroundStateOptions, GroundStateResult};
use hartree_core::{hartree, ModelParams, RadialGrid};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use wasm_bindgen::prelude::*;

// keep page-sized problems page-sized
const MAX_NODES: usize = 512;

fn setup(d: usize, a: f64, n: usize, r_max: f64) -> Result<(Arc<RadialGrid>, GroundStateResult), String> {
    if n > MAX_NODES {
        return Err(format!("n = {n} is above the demo limit {MAX_NODES}"));
    }
    let params = ModelParams::new(d, a).map_err(|e| e.to_string())?;
    let grid = Arc::new(RadialGrid::new(params, n, r_max).map_err(|e| e.to_string())?);
    let gs = ground_state::solve_ground_state(&grid, &GroundStateOptions::default()).map_err(|e| e.to_string())?;
    Ok((grid, gs))
}

fn reply(r: Result<serde_json::Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

/// Ground state: `{m_gs, residual, pohozaev, r[], q[]}`.
#[wasm_bindgen]
pub fn ground_state(d: usize, a: f64, n: usize, r_max: f64) -> String {
    reply(setup(d, a, n, r_max).map(|(grid, gs)| {
        json!({
            "m_gs": gs.m_gs,
            "residual": gs.residual,
            "pohozaev": gs.pohozaev(),
            "iterations": gs.iterations,
            "r": grid.nodes,
            "q": gs.q.real_parts(),
        })
    }))
}

/// Evolve a Gaussian of width `sigma` scaled to `mass_fraction * M_gs`;
/// returns the sampled `t, M, H, E, Gamma` and the stop reason.
#[wasm_bindgen]
pub fn evolve_gaussian(d: usize, a: f64, n: usize, r_max: f64, sigma: f64, mass_fraction: f64, dt: f64, t_end: f64) -> String {
    reply((|| {
        if !(sigma > 0.0 && mass_fraction > 0.0) {
            return Err("sigma and mass_fraction must be positive".to_string());
        }
        let (grid, gs) = setup(d, a, n, r_max)?;
        let u = natural_profile(grid, |r| (-r * r / (2.0 * sigma * sigma)).exp()).map_err(|e| e.to_string())?;
        let u = u.scaled(Complex64::new((mass_fraction * gs.m_gs / functionals::mass(&u)).sqrt(), 0.0));
        let stride = ((t_end / dt) / 200.0).ceil().max(1.0) as usize;
        let cfg = IntegratorConfig { dt, t_end, stride, ..Default::default() };
        let tr = evolution::evolve(&u, &cfg).map_err(|e| e.to_string())?;
        let col = |f: &dyn Fn(&evolution::Sample) -> f64| tr.samples.iter().map(f).collect::<Vec<f64>>();
        Ok(json!({
            "m_gs": gs.m_gs,
            "t": col(&|s| s.t),
            "M": col(&|s| s.q.m),
            "H": col(&|s| s.q.h),
            "E": col(&|s| s.q.e),
            "Gamma": col(&|s| s.gamma),
            "stop_reason": tr.stop_reason,
        }))
    })())
}

/// Hardy, sharp GN and rotated-energy discriminant over `count` seeded fields.
#[wasm_bindgen]
pub fn verify(d: usize, a: f64, n: usize, r_max: f64, count: usize, seed: u64) -> String {
    reply((|| {
        let (grid, gs) = setup(d, a, n, r_max)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = functionals::hardy_bound(d);
        let theta = ThetaProfile { radius: r_max / 3.0 };
        let mut hardy = Vec::with_capacity(count);
        let mut j = Vec::with_capacity(count);
        let mut disc_ok = 0;
        for _ in 0..count {
            let u = ground_state::random_smooth_field(&grid, &mut rng, true).map_err(|e| e.to_string())?;
            hardy.push(functionals::hardy_ratio(&u).map_err(|e| e.to_string())? / bound);
            let lv = hartree::lv_value(&u);
            j.push(functionals::mass(&u) * functionals::kinetic(&u) / lv / gs.m_gs);
            let at = u.scaled(Complex64::new((gs.m_gs / functionals::mass(&u)).sqrt(), 0.0));
            let rep = evolution::rotated_energy_check(&at, theta, 1.0, Some(gs.m_gs)).map_err(|e| e.to_string())?;
            if rep.discriminant.unwrap_or(f64::NAN) <= 1e-9 * (rep.linear.powi(2) + 2.0 * rep.energy.abs() * rep.quadratic) {
                disc_ok += 1;
            }
        }
        Ok(json!({
            "m_gs": gs.m_gs,
            "hardy_over_bound": hardy,
            "j_over_m_gs": j,
            "hardy_ok": hardy.iter().filter(|&&h| h <= 1.0).count(),
            "gn_ok": j.iter().filter(|&&x| x >= 1.0 - 1e-6).count(),
            "discriminant_ok": disc_ok,
            "count": count,
        }))
    })())
}
