#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Monte-Carlo estimate of `(1/4) int int |f(x)|^2 |f(y)|^2 / |x-y|^2 dx dy` for
/// a radial profile `f`, with its standard error.
///
/// `x` is drawn from an isotropic Gaussian of width `sx`; the separation
/// `z = y - x` from the density proportional to `|z|^{-2} e^{-|z|^2 / (2 sz^2)}`,
/// which absorbs the kernel singularity (|z| = sz * chi_{d-2}).
pub fn hartree_energy_mc(d: usize, f: impl Fn(f64) -> f64, sx: f64, sz: f64, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let df = d as f64;
    let omega = 2.0 * PI.powf(df / 2.0) / gamma(df / 2.0);
    let zq = omega * sz.powf(df - 2.0) * 2f64.powf((df - 4.0) / 2.0) * gamma((df - 2.0) / 2.0);
    let px_norm = (2.0 * PI * sx * sx).powf(-df / 2.0);
    let mut x = vec![0.0; d];
    let mut dir = vec![0.0; d];
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for k in 0..samples {
        let mut rx2 = 0.0;
        for xi in x.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *xi = sx * g;
            rx2 += *xi * *xi;
        }
        let mut chi2 = 0.0;
        for _ in 0..d - 2 {
            let g: f64 = rng.sample(StandardNormal);
            chi2 += g * g;
        }
        let t = sz * chi2.sqrt();
        let mut nd = 0.0;
        for di in dir.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *di = g;
            nd += g * g;
        }
        let nd = nd.sqrt();
        let mut ry2 = 0.0;
        for i in 0..d {
            let yi = x[i] + t * dir[i] / nd;
            ry2 += yi * yi;
        }
        let fx = f(rx2.sqrt());
        let fy = f(ry2.sqrt());
        let px = px_norm * (-rx2 / (2.0 * sx * sx)).exp();
        // |z|^2 q(z) = e^{-t^2/(2 sz^2)} / zq
        let v = fx * fx * fy * fy * zq / ((-t * t / (2.0 * sz * sz)).exp() * px);
        let delta = v - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (v - mean);
    }
    let var = m2 / (samples - 1) as f64;
    (0.25 * mean, 0.25 * (var / samples as f64).sqrt())
}

fn gamma(x: f64) -> f64 {
    // Lanczos, g = 7
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.5203681218851,
        -1259.1392167224028,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507343278686905,
        -0.13857109526572012,
        9.984_369_578_019_572e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut a = C[0];
        let t = x + 7.5;
        for (i, c) in C.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }
}

/// Dawson's integral `F(x) = e^{-x^2} int_0^x e^{t^2} dt` by RK4 on
/// `F' = 1 - 2 x F`.
pub fn dawson(x: f64) -> f64 {
    let steps = ((x / 1e-3).ceil() as usize).max(1);
    let h = x / steps as f64;
    let rhs = |t: f64, f: f64| 1.0 - 2.0 * t * f;
    let mut f = 0.0;
    let mut t = 0.0;
    for _ in 0..steps {
        let k1 = rhs(t, f);
        let k2 = rhs(t + 0.5 * h, f + 0.5 * h * k1);
        let k3 = rhs(t + 0.5 * h, f + 0.5 * h * k2);
        let k4 = rhs(t + h, f + h * k3);
        f += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
    }
    f
}

/// Composite Simpson rule with `m` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}
