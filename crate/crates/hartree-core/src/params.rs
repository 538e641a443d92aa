use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Dimension and inverse-square coupling, with the derived exponents.
///
/// `nu` is the Bessel order that diagonalizes `L_a` on radial functions and
/// `rho` the origin exponent: ground states behave like `r^{-rho}` near 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: usize,
    pub a: f64,
    pub rho: f64,
    pub nu: f64,
}

impl ModelParams {
    pub fn new(d: usize, a: f64) -> Result<Self> {
        if d < 3 {
            return Err(LabError::InvalidParams(format!("dimension d = {d} must be >= 3")));
        }
        if !a.is_finite() {
            return Err(LabError::InvalidParams("coupling a must be finite".into()));
        }
        let h = (d as f64 - 2.0) / 2.0;
        if a <= -h * h {
            return Err(LabError::InvalidParams(format!(
                "coupling a = {a} must satisfy a > -((d-2)/2)^2 = {}",
                -h * h
            )));
        }
        let nu = (h * h + a).sqrt();
        Ok(ModelParams { d, a, rho: h - nu, nu })
    }

    /// Lower bound on `a` (exclusive).
    pub fn a_min(d: usize) -> f64 {
        let h = (d as f64 - 2.0) / 2.0;
        -h * h
    }

    pub fn half_dm2(&self) -> f64 {
        (self.d as f64 - 2.0) / 2.0
    }

    /// Area of the unit sphere S^{d-1}.
    pub fn sphere_area(&self) -> f64 {
        sphere_area(self.d)
    }
}

pub fn sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(h) / puruspe::gamma(h)
}
