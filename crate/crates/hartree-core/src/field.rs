use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::grid::RadialGrid;

/// Complex samples `u(r_j)` on a shared grid.
#[derive(Clone, Debug)]
pub struct ComplexRadialField {
    grid: Arc<RadialGrid>,
    values: Vec<Complex64>,
}

impl ComplexRadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(LabError::InvalidGrid(format!(
                "field has {} samples, grid has {} nodes",
                values.len(),
                grid.n
            )));
        }
        if let Some(j) = values.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LabError::NonFinite(j));
        }
        Ok(ComplexRadialField { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.n;
        ComplexRadialField { grid, values: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.nodes.iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn from_real_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(grid, |r| Complex64::new(f(r), 0.0))
    }

    pub fn from_real(grid: Arc<RadialGrid>, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub(crate) fn from_parts_unchecked(grid: Arc<RadialGrid>, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.n);
        ComplexRadialField { grid, values }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            Some(j) => Err(LabError::NonFinite(j)),
            None => Ok(()),
        }
    }

    pub fn same_grid(&self, other: &ComplexRadialField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) {
            Ok(())
        } else {
            Err(LabError::GridMismatch)
        }
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        self.map(|_, z| z * s)
    }

    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let values = self.grid.nodes.iter().zip(&self.values).map(|(&r, &z)| f(r, z)).collect();
        ComplexRadialField { grid: self.grid.clone(), values }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.norm_sqr() == 0.0)
    }
}
