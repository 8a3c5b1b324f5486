//! Polynomial differential forms, Poincaré liftings, commuting projections and
//! p-version Maxwell eigenproblems on affine meshes.

pub mod assembly;
pub mod error;
pub mod forms;
pub mod interp;
pub mod linalg;
pub mod mesh;
pub mod quadrature;
pub mod scalar;
pub mod spaces;

pub use error::{Error, Result};
pub use scalar::{Rational, Scalar};
