//! Commuting projections onto the local spaces and empirical approximation rates.

mod field;
mod projector;
mod surrogate;

pub use field::{Derivative, FnField, FormField, PolyField};
pub use projector::{check_commute, commute_residual, l2_error, Projector};
pub use surrogate::{measure_locapprox, s_norm, sinusoid_surrogate, LocApproxRow};
