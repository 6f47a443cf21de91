//! PSL₂ phase tropicalization: Puiseux-series matrices, their valuation into
//! the cone picture of ℂP³, images of lines and of explicit surface families,
//! and a certifier for the absence of lines on generic surfaces.

pub mod certifier;
pub mod cpoly;
pub mod error;
pub mod hyperbolic;
pub mod lines;
pub mod mat2;
pub mod puiseux;
pub mod surfaces;
pub mod valuation;

pub use error::{Error, Result};

/// Numeric tolerances shared by the membership oracles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Distance between projective classes.
    pub proj: f64,
    /// Residual of a defining equation on a unit-normalized point.
    pub curve: f64,
    /// Heights at or below this are on the tip.
    pub tip: f64,
    /// Agreement of two heights.
    pub height: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { proj: 1e-9, curve: 1e-6, tip: 1e-6, height: 1e-8 }
    }
}
