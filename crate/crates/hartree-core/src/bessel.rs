//! Bessel functions of real order, tuned for the dense transform matrices.
//!
//! `puruspe::besseljy` is accurate but its continued fraction costs O(x), so
//! large arguments go through the Hankel asymptotic expansion instead.

use std::f64::consts::PI;

fn hankel_switch(nu: f64) -> f64 {
    25.0 + nu * nu
}

/// Hankel expansion, J_nu(x) = sqrt(2/(pi x)) (P cos chi - Q sin chi).
fn j_asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        term *= (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
        let mag = term.abs();
        if mag > last {
            break;
        }
        last = mag;
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if mag < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// J_nu(x) for nu >= 0, x >= 0.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x >= hankel_switch(nu + 1.0) {
        j_asymptotic(nu, x)
    } else {
        puruspe::besseljy(nu, x).0
    }
}

/// (J_nu(x), J'_nu(x)).
pub fn bessel_j_deriv(nu: f64, x: f64) -> (f64, f64) {
    if x >= hankel_switch(nu + 1.0) {
        let j = j_asymptotic(nu, x);
        let j1 = j_asymptotic(nu + 1.0, x);
        (j, nu / x * j - j1)
    } else {
        let (j, _, jp, _) = puruspe::besseljy(nu, x);
        (j, jp)
    }
}

/// The first `count` positive zeros of J_nu.
///
/// Sign changes are bracketed on a coarse scan, then refined by a safeguarded
/// Newton iteration.
pub fn bessel_zeros(nu: f64, count: usize) -> Vec<f64> {
    let mut zeros = Vec::with_capacity(count);
    let step = 0.3;
    let mut x0 = nu.max(step);
    let mut f0 = bessel_j(nu, x0);
    while zeros.len() < count {
        let x1 = x0 + step;
        let f1 = bessel_j(nu, x1);
        if f0 == 0.0 {
            zeros.push(x0);
        } else if f0 * f1 < 0.0 {
            zeros.push(refine_zero(nu, x0, x1, f0));
        }
        x0 = x1;
        f0 = f1;
    }
    zeros
}

fn refine_zero(nu: f64, mut lo: f64, mut hi: f64, flo: f64) -> f64 {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let (f, fp) = bessel_j_deriv(nu, x);
        if f == 0.0 {
            return x;
        }
        if (f < 0.0) == (flo < 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        let mut xn = x - f / fp;
        if !(xn > lo && xn < hi) {
            xn = 0.5 * (lo + hi);
        }
        if (xn - x).abs() <= 1e-15 * x {
            return xn;
        }
        x = xn;
    }
    x
}
