//! Spectra of hyperbolic algebraic integers as lattice objects, the counting
//! matrices built on them, and the limit measure they carry.

pub mod algebraic;
pub mod cli;
pub mod error;
pub mod golden;
pub mod measure_analysis;
pub mod projective;
pub mod spectrum;
pub mod transition;

pub use algebraic::{LatticePoint, MinimalPolynomial, NumberField};
pub use error::{Result, SpectraError};
