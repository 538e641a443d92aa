//! The scalar functionals M, H, E, L_V, J and the scaling / rearrangement
//! utilities. All integrals over R^d carry the sphere area `omega_{d-1}`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field::ComplexRadialField;
use crate::grid::RadialGrid;
use crate::hartree;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantities {
    pub m: f64,
    pub h: f64,
    pub e: f64,
    pub lv: f64,
    /// `M H / L_V`; `None` when `L_V = 0`.
    pub j: Option<f64>,
}

impl Quantities {
    pub fn from_parts(m: f64, h: f64, lv: f64) -> Self {
        let j = if lv > 0.0 { Some(m * h / lv) } else { None };
        Quantities { m, h, e: h - lv, lv, j }
    }
}

/// `M = (1/2) int |u|^2`.
pub fn mass(u: &ComplexRadialField) -> f64 {
    let g = u.grid();
    0.5 * g.params.sphere_area() * g.integrate_nodes(&u.density())
}

/// `H = (1/2) <L_a u, u>`, evaluated on the spectral side.
pub fn kinetic(u: &ComplexRadialField) -> f64 {
    let g = u.grid();
    let c = g.forward(u.values());
    0.5 * g.params.sphere_area() * c.iter().enumerate().map(|(m, z)| g.k2(m) * z.norm_sqr()).sum::<f64>()
}

pub fn functionals(u: &ComplexRadialField) -> Result<Quantities> {
    u.check_finite()?;
    let m = mass(u);
    let h = kinetic(u);
    let lv = hartree::lv_value(u);
    Ok(Quantities::from_parts(m, h, lv))
}

/// `int |grad u|^2` (with the sphere factor), from the spectral identity
/// `<L_a u, u> = int |grad u|^2 + a int |u|^2/|x|^2`.
pub fn gradient_sq(u: &ComplexRadialField) -> f64 {
    let a = u.grid().params.a;
    let k = 2.0 * kinetic(u);
    if a == 0.0 {
        k
    } else {
        k - a * inverse_square(u)
    }
}

/// `int |u|^2 / |x|^2`, exact for fields in the span of the modes.
pub fn inverse_square(u: &ComplexRadialField) -> f64 {
    let g = u.grid();
    let n = g.n;
    let form = g.inverse_square_form();
    let c = g.forward(u.values());
    let re: Vec<f64> = c.iter().map(|z| z.re).collect();
    let im: Vec<f64> = c.iter().map(|z| z.im).collect();
    let mut acc = 0.0;
    for l in 0..n {
        let row = &form[l * n..(l + 1) * n];
        acc += re[l] * crate::grid::dot(row, &re) + im[l] * crate::grid::dot(row, &im);
    }
    g.params.sphere_area() * acc
}

/// `int |x|^2 |u|^2`.
pub fn variance(u: &ComplexRadialField) -> f64 {
    let g = u.grid();
    let s: Vec<f64> = u.density().iter().zip(&g.nodes).map(|(p, r)| p * r * r).collect();
    g.params.sphere_area() * g.integrate_nodes(&s)
}

/// `(int |u|^2/|x|^2) / (int |grad u|^2)`; Hardy bounds it by `(2/(d-2))^2`.
pub fn hardy_ratio(u: &ComplexRadialField) -> Result<f64> {
    u.check_finite()?;
    if u.is_zero() {
        return Err(LabError::ZeroField("hardy ratio of the zero field"));
    }
    Ok(inverse_square(u) / gradient_sq(u))
}

pub fn hardy_bound(d: usize) -> f64 {
    (2.0 / (d as f64 - 2.0)).powi(2)
}

/// `(int |u|^p)^{1/p}` by node quadrature.
pub fn lp_norm(u: &ComplexRadialField, p: f64) -> f64 {
    let g = u.grid();
    let f: Vec<f64> = u.values().iter().map(|z| z.norm().powf(p)).collect();
    (g.params.sphere_area() * g.integrate_nodes(&f)).powf(1.0 / p)
}

/// `|L_V(u) - L_V(v)| / (|u-v|_p (|u|_p^3 + |u-v|_p^3))` with `p = 2d/(d-1)`,
/// the ratio bounded by a constant through HLS. `None` when `u == v`.
pub fn lv_continuity_ratio(u: &ComplexRadialField, v: &ComplexRadialField) -> Result<Option<f64>> {
    u.same_grid(v)?;
    let d = u.grid().d() as f64;
    let p = 2.0 * d / (d - 1.0);
    let diff = ComplexRadialField::new(u.grid().clone(), u.values().iter().zip(v.values()).map(|(a, b)| a - b).collect())?;
    let nd = lp_norm(&diff, p);
    if nd == 0.0 {
        return Ok(None);
    }
    let nu = lp_norm(u, p);
    let gap = (hartree::lv_value(u) - hartree::lv_value(v)).abs();
    Ok(Some(gap / (nd * (nu.powi(3) + nd.powi(3)))))
}

pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

/// `mu * u(nu_s r)`, resampled by evaluating the mode expansion (spectral
/// interpolation) at `nu_s r_j`.
///
/// When `nu_s < 1` the profile spreads outward; the part of the original
/// profile that would land beyond `r_max` is measured and must stay below
/// `tail_tol` (relative to the mass).
pub fn rescale(u: &ComplexRadialField, mu: f64, nu_s: f64, tail_tol: f64) -> Result<ComplexRadialField> {
    if !(mu > 0.0 && nu_s > 0.0 && mu.is_finite() && nu_s.is_finite()) {
        return Err(LabError::InvalidParams(format!("rescale needs mu, nu_s > 0 (got {mu}, {nu_s})")));
    }
    u.check_finite()?;
    let g = u.grid();
    if mu == 1.0 && nu_s == 1.0 {
        return Ok(u.clone());
    }
    if nu_s < 1.0 {
        let total = g.integrate_nodes(&u.density());
        if total > 0.0 {
            let cut = nu_s * g.r_max;
            let tail: Vec<f64> = u
                .density()
                .iter()
                .zip(&g.nodes)
                .map(|(p, &r)| if r > cut { *p } else { 0.0 })
                .collect();
            let frac = g.integrate_nodes(&tail) / total;
            if frac > tail_tol {
                return Err(LabError::TailMass(frac));
            }
        }
    }
    let radii: Vec<f64> = g.nodes.iter().map(|r| nu_s * r).collect();
    let vals = if nu_s == 1.0 { u.values().to_vec() } else { g.evaluate_at(u.values(), &radii) };
    ComplexRadialField::new(g.clone(), vals.into_iter().map(|z| z * mu).collect())
}

/// Cell volumes `omega w_j` of the quadrature.
fn cell_volumes(g: &RadialGrid) -> Vec<f64> {
    let om = g.params.sphere_area();
    g.weights.iter().map(|w| om * w).collect()
}

/// Radially non-increasing rearrangement of `|u|`.
///
/// Samples are sorted by value and laid out by cumulative cell volume; the
/// decreasing profile is read off at each cell's volume midpoint (linear
/// between sorted midpoints) and finally normalized to the discrete mass.
pub fn rearrange_decreasing(u: &ComplexRadialField) -> Result<ComplexRadialField> {
    u.check_finite()?;
    let g = u.grid();
    let vol = cell_volumes(g);
    let abs: Vec<f64> = u.values().iter().map(|z| z.norm()).collect();
    let mut order: Vec<usize> = (0..g.n).collect();
    order.sort_by(|&i, &j| abs[j].total_cmp(&abs[i]).then(i.cmp(&j)));
    let mut knots_x = Vec::with_capacity(g.n);
    let mut knots_y = Vec::with_capacity(g.n);
    let mut acc = 0.0;
    for &i in &order {
        knots_x.push(acc + 0.5 * vol[i]);
        knots_y.push(abs[i]);
        acc += vol[i];
    }
    let mut out = Vec::with_capacity(g.n);
    let mut acc = 0.0;
    let mut seg = 0;
    for v in &vol {
        let x = acc + 0.5 * v;
        acc += v;
        while seg + 1 < knots_x.len() && knots_x[seg + 1] <= x {
            seg += 1;
        }
        let y = if x <= knots_x[0] {
            knots_y[0]
        } else if seg + 1 >= knots_x.len() {
            knots_y[knots_x.len() - 1]
        } else {
            let t = (x - knots_x[seg]) / (knots_x[seg + 1] - knots_x[seg]);
            knots_y[seg] + t * (knots_y[seg + 1] - knots_y[seg])
        };
        out.push(y);
    }
    let m0: f64 = abs.iter().zip(&vol).map(|(a, v)| a * a * v).sum();
    let m1: f64 = out.iter().zip(&vol).map(|(a, v)| a * a * v).sum();
    if m1 > 0.0 {
        let s = (m0 / m1).sqrt();
        out.iter_mut().for_each(|x| *x *= s);
    }
    ComplexRadialField::from_real(g.clone(), &out)
}

/// Field built from a real profile on `grid`, `f(r) * r^{-rho}`.
pub fn natural_profile(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<ComplexRadialField> {
    let rho = grid.params.rho;
    ComplexRadialField::from_fn(grid, |r| Complex64::new(f(r) * r.powf(-rho), 0.0))
}
