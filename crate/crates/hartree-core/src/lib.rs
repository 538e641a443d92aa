//! Numerical laboratory for the mass-critical focusing Hartree equation with
//! an inverse-square potential,
//!
//! `i u_t - Δu + a|x|^{-2} u = (|x|^{-2} * |u|^2) u`,
//!
//! restricted to radial fields in dimension d >= 3.

pub mod bessel;
pub mod error;
pub mod evolution;
pub mod field;
pub mod functionals;
pub mod grid;
pub mod ground_state;
pub mod hartree;
pub mod params;
pub mod quad;

pub use error::{LabError, Result};
pub use field::ComplexRadialField;
pub use functionals::Quantities;
pub use grid::RadialGrid;
pub use params::ModelParams;
