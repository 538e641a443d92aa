//! The nonlocal potential `Phi = |x|^{-2} * |u|^2` for radial `u`.
//!
//! For radial densities `Phi(r) = omega_{d-1} int_0^inf A(r,s) |u(s)|^2 s^{d-1} ds`
//! with `A` the sphere average of `|x-y|^{-2}`:
//!
//! `A(r,s) = r_>^{-2} 2F1(1, 2 - d/2; d/2; (r_</r_>)^2)`,
//!
//! which is `ln((r+s)/|r-s|) / (2rs)` for d = 3, `1/max(r,s)^2` for d = 4, and a
//! terminating polynomial for even d >= 6.
//!
//! The matrix is built by product integration: on each cell between adjacent
//! nodes the smooth part `g = |u|^2 r^{2 rho}` is replaced by its degree-9
//! Lagrange interpolant in `r^2` on the nearest nodes, and the remaining factor
//! `A(r_i, s) s^{2 nu + 1}` is integrated by Gauss–Legendre (clustered at the
//! cell ends when the cell touches `r_i` or the origin). This keeps `Phi`
//! pointwise accurate; the matrix is not symmetric, but the quadratic form
//! `L_V` only sees its symmetric part.

use std::f64::consts::PI;

use crate::error::{LabError, Result};
use crate::grid::{dot, RadialGrid};
use crate::quad::{adaptive_simpson, gauss_legendre};

const STENCIL: usize = 10;
const GAUSS: usize = 20;
const GAUSS_CLUSTERED: usize = 32;
const CLUSTER_POWER: i32 = 4;

/// Sphere average of `|x - y|^{-2}` over `|y| = s` at `|x| = r`.
pub fn kernel(d: usize, r: f64, s: f64) -> Result<f64> {
    if d < 3 {
        return Err(LabError::InvalidParams(format!("dimension d = {d} must be >= 3")));
    }
    if !(r > 0.0 && s > 0.0) {
        return Err(LabError::InvalidParams(format!("kernel needs r, s > 0 (got {r}, {s})")));
    }
    if r == s {
        return Err(LabError::KernelDiagonal(r));
    }
    Ok(kernel_unchecked(d, r, s))
}

pub(crate) fn kernel_unchecked(d: usize, r: f64, s: f64) -> f64 {
    match d {
        3 => ((r + s) / (r - s).abs()).ln() / (2.0 * r * s),
        4 => {
            let m = r.max(s);
            1.0 / (m * m)
        }
        _ => {
            let big = r.max(s);
            let t = (r.min(s) / big).powi(2);
            if d % 2 == 0 || t <= 0.25 {
                hyp_series(d, t) / (big * big)
            } else {
                sphere_average_quadrature(d, r, s)
            }
        }
    }
}

/// 2F1(1, 2 - d/2; d/2; t); terminates for even d.
fn hyp_series(d: usize, t: f64) -> f64 {
    let b = 2.0 - d as f64 / 2.0;
    let c = d as f64 / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..400 {
        let kf = k as f64;
        term *= (b + kf) / (c + kf) * t;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Gegenbauer-type integrand: the mean of `(r^2 + s^2 - 2rs cos theta)^{-1}`
/// against `sin^{d-2} theta` on [0, pi].
fn sphere_average_quadrature(d: usize, r: f64, s: f64) -> f64 {
    let p = d as i32 - 2;
    let f = |th: f64| th.sin().powi(p) / (r * r + s * s - 2.0 * r * s * th.cos());
    let norm = PI.sqrt() * puruspe::gamma((d as f64 - 1.0) / 2.0) / puruspe::gamma(d as f64 / 2.0);
    let scale = 1.0 / (r.max(s).powi(2));
    adaptive_simpson(&f, 0.0, PI, 1e-14 * scale) / norm
}

fn lagrange_row(nodes: &[f64], x: f64, out: &mut [f64]) {
    for (a, o) in out.iter_mut().enumerate() {
        let mut l = 1.0;
        for (b, xb) in nodes.iter().enumerate() {
            if a != b {
                l *= (x - xb) / (nodes[a] - xb);
            }
        }
        *o = l;
    }
}

/// Product-integration matrix: `Phi_i = sum_k entries[i n + k] |u_k|^2`.
pub struct KernelMatrix {
    pub n: usize,
    entries: Vec<f64>,
}

struct CellRule {
    t: Vec<f64>,
    /// weight * s^{2 nu + 1}
    w: Vec<f64>,
    /// Lagrange basis, `basis[q * STENCIL + a]`
    basis: Vec<f64>,
}

impl KernelMatrix {
    pub fn build(grid: &RadialGrid) -> Self {
        let n = grid.n;
        let d = grid.d();
        let nu = grid.params.nu;
        let rho = grid.params.rho;
        let omega = grid.params.sphere_area();
        // node n (index) is r_max where the Dirichlet field vanishes
        let mut ext = grid.nodes.clone();
        ext.push(grid.r_max);
        let sigma: Vec<f64> = ext.iter().map(|r| r * r).collect();
        let (gx, gw) = gauss_legendre(GAUSS);
        let (cx, cw) = gauss_legendre(GAUSS_CLUSTERED);

        let rule = |lo: f64, hi: f64, clustered: bool, stencil: &[f64]| -> CellRule {
            let (xs, ws) = if clustered { (&cx, &cw) } else { (&gx, &gw) };
            let mut t = Vec::with_capacity(xs.len());
            let mut w = Vec::with_capacity(xs.len());
            for (x, wq) in xs.iter().zip(ws.iter()) {
                let tau = 0.5 * (x + 1.0);
                let (y, dy) = if clustered {
                    let q = CLUSTER_POWER;
                    let a = tau.powi(q);
                    let b = (1.0 - tau).powi(q);
                    let y = a / (a + b);
                    let dy = q as f64 * tau.powi(q - 1) * (1.0 - tau).powi(q - 1) / (a + b).powi(2);
                    (y, dy)
                } else {
                    (tau, 1.0)
                };
                let s = lo + (hi - lo) * y;
                t.push(s);
                w.push(0.5 * wq * (hi - lo) * dy * s.powf(2.0 * nu + 1.0));
            }
            let mut basis = vec![0.0; t.len() * STENCIL];
            for (q, s) in t.iter().enumerate() {
                lagrange_row(stencil, s * s, &mut basis[q * STENCIL..(q + 1) * STENCIL]);
            }
            CellRule { t, w, basis }
        };

        let mut p = vec![0.0; n * (n + 1)];
        let mut acc = [0.0; STENCIL];
        for c in 0..=n {
            let lo = if c == 0 { 0.0 } else { ext[c - 1] };
            let hi = ext[c];
            let centre = 0.5 * (lo + hi);
            // nearest STENCIL nodes (contiguous window around the cell)
            let mut start = c.saturating_sub(STENCIL / 2);
            if start + STENCIL > n + 1 {
                start = n + 1 - STENCIL;
            }
            while start > 0 && (ext[start - 1] - centre).abs() < (ext[start + STENCIL - 1] - centre).abs() {
                start -= 1;
            }
            while start + STENCIL < n + 1 && (ext[start + STENCIL] - centre).abs() < (ext[start] - centre).abs() {
                start += 1;
            }
            let stencil = &sigma[start..start + STENCIL];
            let plain = rule(lo, hi, c == 0, stencil);
            let clustered = if c == 0 { None } else { Some(rule(lo, hi, true, stencil)) };
            for i in 0..n {
                let touches = i + 1 == c || i == c;
                let cr = if touches { clustered.as_ref().unwrap_or(&plain) } else { &plain };
                let ri = grid.nodes[i];
                acc.fill(0.0);
                for (q, (&s, &w)) in cr.t.iter().zip(&cr.w).enumerate() {
                    let f = if s == ri { 0.0 } else { kernel_unchecked(d, ri, s) * w };
                    let row = &cr.basis[q * STENCIL..(q + 1) * STENCIL];
                    for a in 0..STENCIL {
                        acc[a] += f * row[a];
                    }
                }
                let prow = &mut p[i * (n + 1)..(i + 1) * (n + 1)];
                for a in 0..STENCIL {
                    prow[start + a] += acc[a];
                }
            }
        }
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                entries[i * n + k] = omega * p[i * (n + 1) + k] * grid.nodes[k].powf(2.0 * rho);
            }
        }
        KernelMatrix { n, entries }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// `Phi` at the nodes from the density `|u|^2` at the nodes.
    pub fn apply(&self, density: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(self.row(i), density)).collect()
    }

    /// Action of the transposed kernel, reweighted to a potential:
    /// `(1/W_k) sum_i W_i density_i P_ik`.
    pub fn apply_transposed(&self, density: &[f64], weights: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for i in 0..n {
            let x = weights[i] * density[i];
            for (o, p) in out.iter_mut().zip(self.row(i)) {
                *o += x * p;
            }
        }
        out.iter_mut().zip(weights).for_each(|(o, w)| *o /= w);
        out
    }

    /// Max relative asymmetry of the weighted bilinear form `W_i P_ik`.
    pub fn asymmetry(&self, weights: &[f64]) -> f64 {
        let n = self.n;
        let mut num: f64 = 0.0;
        let mut den: f64 = 0.0;
        for i in 0..n {
            for k in 0..n {
                let a = weights[i] * self.entries[i * n + k];
                let b = weights[k] * self.entries[k * n + i];
                num = num.max((a - b).abs());
                den = den.max(a.abs());
            }
        }
        num / den
    }
}

use crate::field::ComplexRadialField;

/// `Phi = |x|^{-2} * |u|^2` at the nodes.
pub fn potential(u: &ComplexRadialField) -> Vec<f64> {
    potential_of_density(u.grid(), &u.density())
}

pub fn potential_of_density(grid: &RadialGrid, density: &[f64]) -> Vec<f64> {
    grid.kernel().apply(density)
}

/// `L_V = (1/4) int Phi |u|^2`.
pub fn lv_value(u: &ComplexRadialField) -> f64 {
    let grid = u.grid();
    let rho = u.density();
    let phi = grid.kernel().apply(&rho);
    lv_from(grid, &rho, &phi)
}

pub(crate) fn lv_from(grid: &RadialGrid, density: &[f64], phi: &[f64]) -> f64 {
    let s: f64 = grid.weights.iter().zip(density).zip(phi).map(|((w, r), p)| w * r * p).sum();
    0.25 * grid.params.sphere_area() * s
}

/// `L_V` evaluated with the transposed kernel (the same bilinear form summed
/// the other way round).
pub fn lv_value_transposed(u: &ComplexRadialField) -> f64 {
    let grid = u.grid();
    let rho = u.density();
    let phi_t = grid.kernel().apply_transposed(&rho, &grid.weights);
    lv_from(grid, &rho, &phi_t)
}
