//! Global zero-trace spaces, Galerkin matrices, the discrete eigenproblem and
//! structural diagnostics.

mod conforming;
mod diagnostics;
mod eigen;
mod field;
mod operators;
mod reference;

pub use conforming::ConformingSpace;
pub use diagnostics::{
    cas_error, cdk_error, chn_gap, chn_gap_with, discrete_gradient, friedrichs_constant, kernel_complement_diagnostics,
    nested_embedding, rank, spectrum_of, spurious_scan, KernelReport,
};
pub use field::DiscreteField;
pub use eigen::{solve_evp, Spectrum, ZeroThreshold, DENSE_LIMIT};
pub use operators::{assemble, assemble_default, cell_matrices, MaterialField, OperatorPair};
pub use reference::{mode_multiplicity, reference_eigenvalues};
