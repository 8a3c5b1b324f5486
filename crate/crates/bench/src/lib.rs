//! Shared fixtures for the criterion benches.

use pforms::mesh::{builtin_mesh, Mesh};
use pforms::spaces::{Family, FamilySpec};

pub fn square(refine: usize) -> Mesh {
    builtin_mesh("square-tri", refine).expect("built-in mesh")
}

pub fn cube(refine: usize) -> Mesh {
    builtin_mesh("cube-tet", refine).expect("built-in mesh")
}

pub fn edge_spec(family: Family, p: usize, dim: usize) -> FamilySpec {
    FamilySpec::new(family, p, 1, dim).expect("valid spec")
}
