//! Charts, coordinate tensor fields and the Schouten–Nijenhuis calculus.

mod calculus;
mod chart;
mod fields;
mod multivector;

pub use calculus::*;
pub use chart::{Chart, ChartPoint, Exclusion};
pub use fields::{BivectorField, OneOneField, ScalarField, VectorField, VectorFieldHandle};
pub use multivector::{Multivector, MAX_DEGREE};
