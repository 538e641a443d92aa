//! Ground states of `L_a Q + Q = Phi[Q^2] Q` and the threshold `M_gs = J(Q)`.
//!
//! Two stages, both in real arithmetic with negative samples projected to 0:
//!
//! 1. descent on `log J` with a Sobolev preconditioner `(L_a/H + 1/M)^{-1}`,
//!    step halved whenever J would increase (monotone trace);
//! 2. Petviashvili iteration in the spectral basis, which converges to the
//!    frequency-one solution of the Euler–Lagrange equation.
//!
//! At a solution of the discrete Euler–Lagrange equation the Pohozaev chain
//! `M = H = L_V` is what remains to be checked; its defect measures the
//! discretization error, not the solver tolerance.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field::ComplexRadialField;
use crate::functionals::{self, Quantities};
use crate::grid::RadialGrid;
use crate::hartree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialGuess {
    Gaussian,
    Sech,
}

impl std::str::FromStr for InitialGuess {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "gaussian" => Ok(InitialGuess::Gaussian),
            "sech" => Ok(InitialGuess::Sech),
            _ => Err(format!("unknown initial guess '{s}' (expected gaussian | sech)")),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroundStateOptions {
    pub initial: InitialGuess,
    /// Iterations of the monotone J-descent stage.
    pub descent_iters: usize,
    pub step: f64,
    pub max_iter: usize,
    /// Required Euler–Lagrange residual.
    pub tol: f64,
}

impl Default for GroundStateOptions {
    fn default() -> Self {
        GroundStateOptions { initial: InitialGuess::Gaussian, descent_iters: 60, step: 1e-2, max_iter: 2000, tol: 1e-9 }
    }
}

#[derive(Clone, Debug)]
pub struct GroundStateResult {
    pub q: ComplexRadialField,
    pub m_gs: f64,
    pub residual: f64,
    pub iterations: usize,
    /// (iteration, J) pairs; the descent stage is monotone.
    pub trace: Vec<(usize, f64)>,
    pub descent_len: usize,
    pub quantities: Quantities,
}

impl GroundStateResult {
    /// The three pairwise Pohozaev defects, relative to `M_gs`:
    /// `|H - L_V|`, `|M - L_V|`, `|M - H|`.
    pub fn pohozaev(&self) -> [f64; 3] {
        let q = &self.quantities;
        [(q.h - q.lv).abs() / self.m_gs, (q.m - q.lv).abs() / self.m_gs, (q.m - q.h).abs() / self.m_gs]
    }
}

pub fn initial_guess(grid: &Arc<RadialGrid>, kind: InitialGuess) -> Result<ComplexRadialField> {
    let f: fn(f64) -> f64 = match kind {
        InitialGuess::Gaussian => |r| (-0.5 * r * r).exp(),
        InitialGuess::Sech => |r| 1.0 / r.cosh(),
    };
    functionals::natural_profile(grid.clone(), f)
}

fn weighted_norm(grid: &RadialGrid, v: &[f64]) -> f64 {
    grid.weights.iter().zip(v).map(|(w, x)| w * x * x).sum::<f64>().sqrt()
}

/// `||L_a Q + Q - Phi Q|| / ||Q||` in the discrete L^2 norm.
pub fn el_residual(q: &ComplexRadialField) -> Result<f64> {
    q.check_finite()?;
    if q.is_zero() {
        return Err(LabError::ZeroField("Euler-Lagrange residual of the zero field"));
    }
    let g = q.grid();
    let u = q.values();
    let lu = g.apply_la(u);
    let phi = hartree::potential(q);
    let w = &g.weights;
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..g.n {
        let r = lu[j] + u[j] - u[j] * phi[j];
        num += w[j] * r.norm_sqr();
        den += w[j] * u[j].norm_sqr();
    }
    Ok((num / den).sqrt())
}

struct Eval {
    m: f64,
    h: f64,
    lv: f64,
    j: f64,
    lu: Vec<f64>,
    phi: Vec<f64>,
}

fn evaluate(grid: &RadialGrid, u: &[f64]) -> Eval {
    let om = grid.params.sphere_area();
    let c = grid.forward_real(u);
    let h = 0.5 * om * c.iter().enumerate().map(|(m, x)| grid.k2(m) * x * x).sum::<f64>();
    let ck: Vec<f64> = c.iter().enumerate().map(|(m, x)| grid.k2(m) * x).collect();
    let lu = grid.inverse_real(&ck);
    let dens: Vec<f64> = u.iter().map(|x| x * x).collect();
    let phi = grid.kernel().apply(&dens);
    let m = 0.5 * om * grid.integrate_nodes(&dens);
    let lv = hartree::lv_from(grid, &dens, &phi);
    let j = if lv > 0.0 { m * h / lv } else { f64::INFINITY };
    Eval { m, h, lv, j, lu, phi }
}

pub fn solve_ground_state(grid: &Arc<RadialGrid>, opts: &GroundStateOptions) -> Result<GroundStateResult> {
    let u0 = initial_guess(grid, opts.initial)?;
    solve_from(grid, u0.real_parts(), opts)
}

pub fn solve_from(grid: &Arc<RadialGrid>, mut u: Vec<f64>, opts: &GroundStateOptions) -> Result<GroundStateResult> {
    let n = grid.n;
    if u.iter().any(|x| !x.is_finite()) {
        return Err(LabError::NonFinite(u.iter().position(|x| !x.is_finite()).unwrap_or(0)));
    }
    u.iter_mut().for_each(|x| *x = x.max(0.0));
    if u.iter().all(|&x| x == 0.0) {
        return Err(LabError::Collapse);
    }
    let mut trace = Vec::new();
    let mut ev = evaluate(grid, &u);
    trace.push((0, ev.j));

    // Stage 1: monotone descent on log J.
    let mut tau = opts.step;
    let mut it = 0;
    while it < opts.descent_iters.min(opts.max_iter) {
        it += 1;
        let g: Vec<f64> =
            (0..n).map(|j| u[j] / ev.m + ev.lu[j] / ev.h - ev.phi[j] * u[j] / ev.lv).collect();
        let mut gc = grid.forward_real(&g);
        for (m, x) in gc.iter_mut().enumerate() {
            *x /= grid.k2(m) / ev.h + 1.0 / ev.m;
        }
        let p = grid.inverse_real(&gc);
        let mut accepted = false;
        for _ in 0..40 {
            let mut v: Vec<f64> = u.iter().zip(&p).map(|(x, d)| (x - tau * d).max(0.0)).collect();
            let mv = 0.5 * grid.params.sphere_area() * grid.integrate_nodes(&v.iter().map(|x| x * x).collect::<Vec<_>>());
            if mv == 0.0 {
                tau *= 0.5;
                continue;
            }
            let s = (ev.m / mv).sqrt();
            v.iter_mut().for_each(|x| *x *= s);
            let e2 = evaluate(grid, &v);
            if e2.j <= ev.j {
                u = v;
                ev = e2;
                accepted = true;
                tau = (tau * 1.5).min(1.0);
                break;
            }
            tau *= 0.5;
        }
        trace.push((it, ev.j));
        if !accepted {
            break;
        }
    }
    let descent_len = trace.len();

    // Stage 2: Petviashvili iteration at frequency one.
    let mut residual = f64::INFINITY;
    while it < opts.max_iter {
        it += 1;
        let c = grid.forward_real(&u);
        let nl: Vec<f64> = u.iter().zip(&ev.phi).map(|(x, p)| x * p).collect();
        let nc = grid.forward_real(&nl);
        let mut num = 0.0;
        let mut den = 0.0;
        for m in 0..n {
            num += (grid.k2(m) + 1.0) * c[m] * c[m];
            den += c[m] * nc[m];
        }
        if !(den > 0.0) {
            return Err(LabError::Collapse);
        }
        let s = (num / den).powf(1.5);
        let cn: Vec<f64> = (0..n).map(|m| s * nc[m] / (grid.k2(m) + 1.0)).collect();
        u = grid.inverse_real(&cn);
        u.iter_mut().for_each(|x| *x = x.max(0.0));
        if u.iter().all(|&x| x == 0.0) || u.iter().any(|x| !x.is_finite()) {
            return Err(LabError::Collapse);
        }
        ev = evaluate(grid, &u);
        trace.push((it, ev.j));
        let r: Vec<f64> = (0..n).map(|j| ev.lu[j] + u[j] - ev.phi[j] * u[j]).collect();
        let prev = residual;
        residual = weighted_norm(grid, &r) / weighted_norm(grid, &u);
        // converged, or stagnating at the round-off floor below tolerance
        if residual < 1e-13 || (residual < opts.tol && residual > 0.9 * prev) {
            break;
        }
    }
    if !(residual < opts.tol) {
        return Err(LabError::NoConvergence { iterations: it, residual, trace });
    }
    let q = ComplexRadialField::from_real(grid.clone(), &u)?;
    let quantities = Quantities::from_parts(ev.m, ev.h, ev.lv);
    let m_gs = quantities.j.ok_or(LabError::Collapse)?;
    Ok(GroundStateResult { q, m_gs, residual, iterations: it, trace, descent_len, quantities })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GnEntry {
    pub index: usize,
    pub j: Option<f64>,
    pub ratio: Option<f64>,
    pub violation: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GnReport {
    pub m_gs: f64,
    pub entries: Vec<GnEntry>,
    pub violations: usize,
    pub min_ratio: f64,
}

/// `J(u)` for each field against `M_gs`; flags `J < M_gs (1 - 1e-6)`.
pub fn gn_audit(fields: &[ComplexRadialField], m_gs: f64) -> GnReport {
    let mut entries = Vec::with_capacity(fields.len());
    let mut min_ratio = f64::INFINITY;
    for (index, u) in fields.iter().enumerate() {
        let j = functionals::functionals(u).ok().and_then(|q| q.j);
        let ratio = j.map(|j| j / m_gs);
        let violation = matches!(ratio, Some(r) if r < 1.0 - 1e-6);
        if let Some(r) = ratio {
            min_ratio = min_ratio.min(r);
        }
        entries.push(GnEntry { index, j, ratio, violation });
    }
    let violations = entries.iter().filter(|e| e.violation).count();
    GnReport { m_gs, entries, violations, min_ratio }
}

/// Seeded random smooth radial field: `r^{-rho}` times a sum of a few
/// Gaussian shells with random centres, widths, amplitudes and phases.
pub fn random_smooth_field<R: Rng>(grid: &Arc<RadialGrid>, rng: &mut R, complex: bool) -> Result<ComplexRadialField> {
    let bumps = rng.random_range(1..=4);
    let mut spec = Vec::with_capacity(bumps);
    let scale = grid.r_max / 12.0;
    for _ in 0..bumps {
        let centre = rng.random_range(0.0..2.5) * scale;
        let width = rng.random_range(0.5..1.5) * scale;
        let amp = rng.random_range(0.2..1.0);
        let phase = if complex { rng.random_range(0.0..std::f64::consts::TAU) } else { 0.0 };
        let chirp = if complex { rng.random_range(-0.5..0.5) / (scale * scale) } else { 0.0 };
        spec.push((centre, width, amp, phase, chirp));
    }
    let rho = grid.params.rho;
    ComplexRadialField::from_fn(grid.clone(), |r| {
        let mut z = Complex64::new(0.0, 0.0);
        for &(c, w, a, ph, ch) in &spec {
            let env = a * ((-(r - c).powi(2) / (2.0 * w * w)).exp() + (-(r + c).powi(2) / (2.0 * w * w)).exp());
            z += Complex64::from_polar(env, ph + ch * r * r);
        }
        z * r.powf(-rho)
    })
}
