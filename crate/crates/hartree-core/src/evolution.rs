//! Time integration of `i u_t = -L_a u + Phi[|u|^2] u` and its diagnostics.
//!
//! Sign convention: with the operator placed as `(i d_t - Δ + a|x|^{-2}) u`
//! the linear propagator is `e^{+i t L_a}` (mode m turns by `e^{+i k_m^2 t}`),
//! the nonlinear substep is `u <- e^{-i Phi dt} u`, and the solitary wave is
//! `e^{-it} Q`. The paper's Duhamel display carries the opposite exponent; the
//! standing-wave check in the tests pins the convention used here.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field::ComplexRadialField;
use crate::functionals::{self, Quantities};
use crate::grid::RadialGrid;
use crate::hartree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    StrangSplit,
    MidpointRelaxation,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::StrangSplit => "strang-split",
            Scheme::MidpointRelaxation => "midpoint-relaxation",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "strang-split" => Ok(Scheme::StrangSplit),
            "midpoint-relaxation" => Ok(Scheme::MidpointRelaxation),
            _ => Err(format!("unknown scheme '{s}' (expected strang-split | midpoint-relaxation)")),
        }
    }
}

/// Concentration window: fixed radius, or `sqrt(T* - t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Window {
    Fixed(f64),
    SqrtToBlowup { t_star: f64 },
}

impl Window {
    pub fn radius(&self, t: f64) -> f64 {
        match *self {
            Window::Fixed(l) => l,
            Window::SqrtToBlowup { t_star } => (t_star - t).max(0.0).sqrt(),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Window::Fixed(l) => format!("conc@{l}"),
            Window::SqrtToBlowup { t_star } => format!("conc@sqrt({t_star}-t)"),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub stride: usize,
    /// Stop once H exceeds this.
    pub h_max: f64,
    /// Stop once the focusing scale sqrt(M/H) drops below this many node
    /// spacings at the origin.
    pub min_cells: f64,
    /// Stability guard: dt * max k^2 must not exceed this.
    pub safety: f64,
    pub windows: Vec<Window>,
    /// Keep field snapshots at the output stride.
    pub snapshots: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt: 1e-3,
            t_end: 1.0,
            scheme: Scheme::StrangSplit,
            stride: 10,
            h_max: 1e8,
            min_cells: 4.0,
            safety: 1e4,
            windows: Vec::new(),
            snapshots: false,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self, grid: &RadialGrid) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(LabError::InvalidParams(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_end >= 0.0) || self.stride == 0 || !(self.h_max > 0.0) || !(self.min_cells > 0.0) {
            return Err(LabError::InvalidParams("t_end >= 0, stride >= 1, positive thresholds required".into()));
        }
        if self.dt * grid.k2_max() > self.safety {
            return Err(LabError::InvalidParams(format!(
                "dt * k_max^2 = {:.3e} exceeds the stability guard {}",
                self.dt * grid.k2_max(),
                self.safety
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Completed,
    HThreshold,
    Unresolved,
    NonFinite,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub q: Quantities,
    pub gamma: f64,
    pub gamma_prime: f64,
    pub conc: Vec<f64>,
    pub boundary_flag: bool,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub window_labels: Vec<String>,
    pub snapshots: Vec<(f64, Vec<Complex64>)>,
    pub stop_reason: StopReason,
    pub steps: usize,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least the initial sample")
    }

    /// `max_t |X(t) - X(0)| / |X(0)|`.
    pub fn max_drift(&self, f: impl Fn(&Sample) -> f64) -> f64 {
        let x0 = f(&self.samples[0]);
        self.samples.iter().map(|s| (f(s) - x0).abs()).fold(0.0, f64::max) / x0.abs()
    }
}

/// Strang step: half phase, exact linear flow, half phase. `phi` is the
/// potential of `u` on entry and is updated to the potential on exit.
fn strang_step(grid: &RadialGrid, u: &mut [Complex64], phi: &mut Vec<f64>, dt: f64) {
    for (z, p) in u.iter_mut().zip(phi.iter()) {
        *z *= Complex64::from_polar(1.0, -0.5 * dt * p);
    }
    let mut c = grid.forward(u);
    for (m, cm) in c.iter_mut().enumerate() {
        *cm *= Complex64::from_polar(1.0, grid.k2(m) * dt);
    }
    let v = grid.inverse(&c);
    u.copy_from_slice(&v);
    let dens: Vec<f64> = u.iter().map(|z| z.norm_sqr()).collect();
    *phi = grid.kernel().apply(&dens);
    for (z, p) in u.iter_mut().zip(phi.iter()) {
        *z *= Complex64::from_polar(1.0, -0.5 * dt * p);
    }
}

/// Crank–Nicolson in time with the relaxation potential
/// `phi_{n+1/2} = 2 Phi[|u_n|^2] - phi_{n-1/2}`. The implicit midpoint system
/// is solved by fixed point iteration preconditioned with the (diagonal)
/// linear part.
fn relaxation_step(grid: &RadialGrid, u: &mut [Complex64], phi_half: &mut Vec<f64>, dt: f64) -> Result<()> {
    let dens: Vec<f64> = u.iter().map(|z| z.norm_sqr()).collect();
    let phi_n = grid.kernel().apply(&dens);
    let phi: Vec<f64> = phi_n.iter().zip(phi_half.iter()).map(|(a, b)| 2.0 * a - b).collect();
    let i = Complex64::new(0.0, 1.0);
    let h = 0.5 * dt;
    let mut mid = u.to_vec();
    let norm: f64 = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let mut converged = false;
    for _ in 0..200 {
        let rhs: Vec<Complex64> = u.iter().zip(&mid).zip(&phi).map(|((un, m), p)| un - i * h * p * m).collect();
        let mut c = grid.forward(&rhs);
        for (m, cm) in c.iter_mut().enumerate() {
            *cm /= Complex64::new(1.0, -h * grid.k2(m));
        }
        let next = grid.inverse(&c);
        let diff: f64 = next.iter().zip(&mid).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        mid = next;
        if diff <= 1e-15 * norm {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LabError::Unstable("relaxation fixed point did not converge; reduce dt".into()));
    }
    for (z, m) in u.iter_mut().zip(&mid) {
        *z = 2.0 * m - *z;
    }
    *phi_half = phi;
    Ok(())
}

/// One step of the chosen scheme (stand-alone; recomputes the potential).
pub fn step(u: &ComplexRadialField, dt: f64, scheme: Scheme) -> Result<ComplexRadialField> {
    let grid = u.grid().clone();
    let mut v = u.values().to_vec();
    let mut phi = hartree::potential(u);
    match scheme {
        Scheme::StrangSplit => strang_step(&grid, &mut v, &mut phi, dt),
        Scheme::MidpointRelaxation => relaxation_step(&grid, &mut v, &mut phi, dt)?,
    }
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LabError::Unstable("non-finite field after step".into()));
    }
    Ok(ComplexRadialField::from_parts_unchecked(grid, v))
}

/// Exact linear flow `e^{+i t L_a}` (no nonlinearity).
pub fn linear_flow(u: &ComplexRadialField, t: f64) -> ComplexRadialField {
    let grid = u.grid();
    let mut c = grid.forward(u.values());
    for (m, cm) in c.iter_mut().enumerate() {
        *cm *= Complex64::from_polar(1.0, grid.k2(m) * t);
    }
    ComplexRadialField::from_parts_unchecked(grid.clone(), grid.inverse(&c))
}

/// Virial quantities `Gamma = int |x|^2 |u|^2`, `Gamma' = -4 Im int conj(u) x.grad u`,
/// and whether more than `tail_tol` of the mass sits in the outer tenth of
/// the domain (variance untrustworthy).
pub fn virial(u: &ComplexRadialField) -> (f64, f64, bool) {
    let g = u.grid();
    let om = g.params.sphere_area();
    let du = g.derivative(u.values());
    let mut gamma = 0.0;
    let mut gp = 0.0;
    let mut total = 0.0;
    let mut outer = 0.0;
    for j in 0..g.n {
        let r = g.nodes[j];
        let w = g.weights[j];
        let p = u.values()[j].norm_sqr();
        gamma += w * r * r * p;
        gp += w * r * (u.values()[j].conj() * du[j]).im;
        total += w * p;
        if r > 0.9 * g.r_max {
            outer += w * p;
        }
    }
    let flag = total > 0.0 && outer / total > BOUNDARY_TOL;
    (om * gamma, -4.0 * om * gp, flag)
}

pub const BOUNDARY_TOL: f64 = 1e-8;

/// `(1/2) int_{|x| <= lambda} |u|^2`, cells bounded by node midpoints, with
/// the last cell counted by its volume fraction.
pub fn concentration(u: &ComplexRadialField, lambda: f64) -> f64 {
    let g = u.grid();
    let d = g.d() as i32;
    let om = g.params.sphere_area();
    if lambda >= g.r_max {
        return functionals::mass(u);
    }
    if lambda <= 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for j in 0..g.n {
        let lo = if j == 0 { 0.0 } else { 0.5 * (g.nodes[j - 1] + g.nodes[j]) };
        let hi = if j + 1 == g.n { g.r_max } else { 0.5 * (g.nodes[j] + g.nodes[j + 1]) };
        let p = g.weights[j] * u.values()[j].norm_sqr();
        if hi <= lambda {
            acc += p;
        } else {
            if lambda > lo {
                acc += p * (lambda.powi(d) - lo.powi(d)) / (hi.powi(d) - lo.powi(d));
            }
            break;
        }
    }
    0.5 * om * acc
}

fn sample(u: &ComplexRadialField, t: f64, windows: &[Window]) -> Result<Sample> {
    let q = functionals::functionals(u)?;
    let (gamma, gamma_prime, boundary_flag) = virial(u);
    let conc = windows.iter().map(|w| concentration(u, w.radius(t))).collect();
    Ok(Sample { t, q, gamma, gamma_prime, conc, boundary_flag })
}

pub fn evolve(u0: &ComplexRadialField, cfg: &IntegratorConfig) -> Result<Trajectory> {
    let grid: Arc<RadialGrid> = u0.grid().clone();
    cfg.validate(&grid)?;
    u0.check_finite()?;
    let window_labels = cfg.windows.iter().map(|w| w.label()).collect();
    let mut samples = vec![sample(u0, 0.0, &cfg.windows)?];
    let mut snapshots = Vec::new();
    if cfg.snapshots {
        snapshots.push((0.0, u0.values().to_vec()));
    }
    let nsteps = (cfg.t_end / cfg.dt).round() as usize;
    let h0 = samples[0].q.h;
    let mut u = u0.values().to_vec();
    let mut phi = hartree::potential(u0);
    let mut stop_reason = StopReason::Completed;
    let mut steps = 0;
    for s in 1..=nsteps {
        match cfg.scheme {
            Scheme::StrangSplit => strang_step(&grid, &mut u, &mut phi, cfg.dt),
            Scheme::MidpointRelaxation => relaxation_step(&grid, &mut u, &mut phi, cfg.dt)?,
        }
        steps = s;
        let t = s as f64 * cfg.dt;
        if u.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            let h_last = samples.last().map(|x| x.q.h).unwrap_or(h0);
            if h_last > 4.0 * h0.abs().max(1e-300) {
                stop_reason = StopReason::NonFinite;
                break;
            }
            return Err(LabError::Unstable(format!("non-finite field at t = {t} without H growth")));
        }
        if s % cfg.stride == 0 || s == nsteps {
            let field = ComplexRadialField::from_parts_unchecked(grid.clone(), u.clone());
            let smp = sample(&field, t, &cfg.windows)?;
            let h = smp.q.h;
            let scale = if h > 0.0 { (smp.q.m / h).sqrt() } else { f64::INFINITY };
            samples.push(smp);
            if cfg.snapshots {
                snapshots.push((t, u.clone()));
            }
            if h > cfg.h_max {
                stop_reason = StopReason::HThreshold;
                break;
            }
            if scale < cfg.min_cells * grid.origin_spacing() {
                stop_reason = StopReason::Unresolved;
                break;
            }
        }
    }
    Ok(Trajectory { samples, window_labels, snapshots, stop_reason, steps })
}

/// Minimal-mass blow-up snapshot
/// `(w/tau)^{d/2} e^{-i w^2/tau} e^{i|x|^2/(4 tau)} e^{i theta} Q(w x / tau)`,
/// `tau = T* - t`. `omega` sets the initial concentration; the internal phase
/// `e^{-i w^2/tau}` is the solitary-wave phase carried by the pseudo-conformal
/// map and is checked against direct evolution in the tests.
pub fn pseudo_conformal_family(
    q: &ComplexRadialField,
    t_star: f64,
    theta: f64,
    omega: f64,
    t: f64,
) -> Result<ComplexRadialField> {
    if t >= t_star {
        return Err(LabError::PastBlowup { t, t_star });
    }
    if !(omega > 0.0) {
        return Err(LabError::InvalidParams(format!("scale omega = {omega} must be positive")));
    }
    let g = q.grid();
    let tau = t_star - t;
    let lam = omega / tau;
    let radii: Vec<f64> = g.nodes.iter().map(|r| lam * r).collect();
    let prof = g.evaluate_at(q.values(), &radii);
    let amp = lam.powf(g.d() as f64 / 2.0);
    let vals = g
        .nodes
        .iter()
        .zip(prof)
        .map(|(&r, p)| p * amp * Complex64::from_polar(1.0, -omega * omega / tau + r * r / (4.0 * tau) + theta))
        .collect();
    ComplexRadialField::new(g.clone(), vals)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlowupFit {
    pub t_star: f64,
    pub p: f64,
    pub c_h: f64,
    /// Least-squares constant in `Gamma = c (T* - t)^2`.
    pub gamma_c: f64,
    /// max relative deviation of `Gamma/(T*-t)^2` from `gamma_c`.
    pub gamma_spread: f64,
    pub h_decades: f64,
    pub rms: f64,
}

fn loglog_fit(ts: &[f64], hs: &[f64], t_star: f64) -> (f64, f64, f64) {
    // log H = log C - p log(T* - t)
    let n = ts.len() as f64;
    let xs: Vec<f64> = ts.iter().map(|t| (t_star - t).ln()).collect();
    let ys: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum();
    (-slope, icpt.exp(), (rss / n).sqrt())
}

/// Fit `H = C (T* - t)^{-p}` over samples `(t, H, Gamma)`, then `Gamma = c (T*-t)^2`.
pub fn fit_blowup_series(ts: &[f64], hs: &[f64], gammas: &[f64]) -> Result<BlowupFit> {
    if ts.len() < 10 {
        return Err(LabError::FitRejected(format!("need >= 10 samples, got {}", ts.len())));
    }
    let tail = &hs[hs.len() / 2..];
    if tail.windows(2).any(|w| w[1] < w[0]) {
        return Err(LabError::FitRejected("H is not monotone over the tail".into()));
    }
    let t_last = *ts.last().unwrap();
    let span = t_last - ts[0];
    let obj = |ts_: f64| loglog_fit(ts, hs, ts_).2;
    // golden-section search for T* on a log-spaced bracket beyond the data
    let mut lo = (1e-9 * span.max(1.0)).ln();
    let mut hi = (10.0 * span).ln();
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..=200 {
        let x = lo + (hi - lo) * k as f64 / 200.0;
        let v = obj(t_last + x.exp());
        if v < best.0 {
            best = (v, x);
        }
    }
    let step = (hi - lo) / 200.0;
    lo = best.1 - step;
    hi = best.1 + step;
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = lo;
    let mut b = hi;
    for _ in 0..200 {
        let c = b - gr * (b - a);
        let d = a + gr * (b - a);
        if obj(t_last + c.exp()) < obj(t_last + d.exp()) {
            b = d;
        } else {
            a = c;
        }
    }
    let t_star = t_last + (0.5 * (a + b)).exp();
    let (p, c_h, rms) = loglog_fit(ts, hs, t_star);
    let ratios: Vec<f64> = ts.iter().zip(gammas).map(|(t, g)| g / (t_star - t).powi(2)).collect();
    let num: f64 = ts.iter().zip(gammas).map(|(t, g)| g * (t_star - t).powi(2)).sum();
    let den: f64 = ts.iter().map(|t| (t_star - t).powi(4)).sum();
    let gamma_c = num / den;
    let gamma_spread = ratios.iter().map(|r| (r / gamma_c - 1.0).abs()).fold(0.0, f64::max);
    let hmin = hs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hmax = hs.iter().cloned().fold(0.0, f64::max);
    Ok(BlowupFit { t_star, p, c_h, gamma_c, gamma_spread, h_decades: (hmax / hmin).log10(), rms })
}

pub fn fit_blowup(traj: &Trajectory) -> Result<BlowupFit> {
    let ts: Vec<f64> = traj.samples.iter().map(|s| s.t).collect();
    let hs: Vec<f64> = traj.samples.iter().map(|s| s.q.h).collect();
    let gs: Vec<f64> = traj.samples.iter().map(|s| s.gamma).collect();
    fit_blowup_series(&ts, &hs, &gs)
}

/// Smooth compactly supported phase profile
/// `theta(r) = exp(1 - 1/(1 - (r/R)^2))` for `r < R`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ThetaProfile {
    pub radius: f64,
}

impl ThetaProfile {
    pub fn value(&self, r: f64) -> f64 {
        let x = r / self.radius;
        if x >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - x * x)).exp()
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        let x = r / self.radius;
        if x >= 1.0 {
            0.0
        } else {
            let q = 1.0 - x * x;
            self.value(r) * (-2.0 * x / (q * q)) / self.radius
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RotatedEnergyReport {
    pub s: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub mismatch: f64,
    /// `int grad theta . Im(conj(u) grad u)`
    pub linear: f64,
    /// `int |grad theta|^2 |u|^2`
    pub quadratic: f64,
    pub energy: f64,
    /// `linear^2 - 2 E quadratic`; must be <= 0 at threshold mass.
    pub discriminant: Option<f64>,
}

/// Compare `E(u e^{i s theta})` with `E(u) + s A + (s^2/2) B`.
pub fn rotated_energy_check(u: &ComplexRadialField, theta: ThetaProfile, s: f64, m_gs: Option<f64>) -> Result<RotatedEnergyReport> {
    let g = u.grid();
    let om = g.params.sphere_area();
    let du = g.derivative(u.values());
    let mut a = 0.0;
    let mut b = 0.0;
    for j in 0..g.n {
        let r = g.nodes[j];
        let tp = theta.derivative(r);
        let z = u.values()[j];
        a += g.weights[j] * tp * (z.conj() * du[j]).im;
        b += g.weights[j] * tp * tp * z.norm_sqr();
    }
    let a = om * a;
    let b = om * b;
    let q = functionals::functionals(u)?;
    let rotated = u.map(|r, z| z * Complex64::from_polar(1.0, s * theta.value(r)));
    let lhs = functionals::functionals(&rotated)?.e;
    let rhs = q.e + s * a + 0.5 * s * s * b;
    let discriminant = m_gs.map(|_| a * a - 2.0 * q.e * b);
    Ok(RotatedEnergyReport {
        s,
        lhs,
        rhs,
        mismatch: (lhs - rhs).abs(),
        linear: a,
        quadratic: b,
        energy: q.e,
        discriminant,
    })
}
