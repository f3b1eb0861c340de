//! Amoebas, coamoebas, logarithmic and phase limit sets of subvarieties of
//! the complex torus, with an exact tropical oracle for hypersurfaces.

pub mod cli;
pub mod expr;
pub mod geometry;
pub mod limitset;
pub mod phase;
pub mod polyhedra;
pub mod raster;
pub mod sampler;
pub mod scalar;

pub use scalar::{Rational, Real};

/// Unit direction with `f64` coordinates.
pub type Direction64 = geometry::Direction<f64>;
