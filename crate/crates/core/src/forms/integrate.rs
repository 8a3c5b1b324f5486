use super::{pullback_rect, FormIndex, PolyForm, Polynomial};
use crate::error::{Error, Result};
use crate::mesh::CellKind;
use crate::scalar::{factorial, Scalar};

/// Cell given as the affine image x = origin + Σ ŝ_j edge_j of the unit
/// simplex or unit cube.
#[derive(Clone, Debug, PartialEq)]
pub struct CellGeometry<S> {
    pub kind: CellKind,
    pub origin: Vec<S>,
    pub edges: Vec<Vec<S>>,
}

impl<S: Scalar> CellGeometry<S> {
    pub fn unit(kind: CellKind, dim: usize) -> Self {
        let edges = (0..dim)
            .map(|j| (0..dim).map(|i| if i == j { S::one() } else { S::zero() }).collect())
            .collect();
        CellGeometry { kind, origin: vec![S::zero(); dim], edges }
    }

    /// Simplex from its d+1 vertices.
    pub fn simplex(vertices: &[Vec<S>]) -> Self {
        let origin = vertices[0].clone();
        let edges = vertices[1..]
            .iter()
            .map(|v| v.iter().zip(&origin).map(|(a, b)| a.clone() - b.clone()).collect())
            .collect();
        CellGeometry { kind: CellKind::Simplex, origin, edges }
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    /// Column-major edge vectors as a row-major matrix A with x = A ŝ + origin.
    fn matrix(&self) -> Vec<Vec<S>> {
        let d = self.dim();
        (0..d).map(|i| (0..d).map(|j| self.edges[j][i].clone()).collect()).collect()
    }

    /// Signed Jacobian determinant of the map from the unit cell.
    pub fn jacobian(&self) -> S {
        super::affine::det(&self.matrix())
    }
}

fn unit_monomial_integral<S: Scalar>(kind: CellKind, exps: &[u8]) -> S {
    match kind {
        CellKind::Simplex => {
            let num = exps.iter().fold(num::BigInt::from(1), |acc, &e| acc * factorial(e as usize));
            let total: usize = exps.iter().map(|&e| e as usize).sum();
            S::from_big(&num, &factorial(total + exps.len()))
        }
        CellKind::Cube => exps.iter().fold(S::one(), |acc, &e| acc * S::from_ratio(1, e as i64 + 1)),
    }
}

/// ∫_K u ∧ ⋆v with the Euclidean metric, by exact monomial integration.
pub fn l2_inner<S: Scalar>(u: &PolyForm<S>, v: &PolyForm<S>, cell: &CellGeometry<S>) -> Result<S> {
    if u.dim() != v.dim() || u.degree() != v.degree() || u.dim() != cell.dim() {
        return Err(Error::DimensionMismatch("l2_inner needs forms of one type on the cell's space".into()));
    }
    let jac = cell.jacobian();
    let degenerate = if S::EXACT { jac.is_zero() } else { jac.to_f64().abs() < 1e-14 };
    if degenerate {
        return Err(Error::DegenerateCell("zero volume".into()));
    }
    let mut integrand = Polynomial::zero();
    for idx in FormIndex::all(u.dim(), u.degree()) {
        integrand = integrand.add(&u.component(idx).mul(&v.component(idx)));
    }
    let mut as_form = PolyForm::zero(u.dim(), 0);
    for (m, c) in integrand.terms() {
        as_form.add_term(FormIndex::EMPTY, *m, c.clone());
    }
    let pulled = pullback_rect(&as_form, &cell.matrix(), &cell.origin);
    let d = cell.dim();
    let total = pulled
        .terms()
        .fold(S::zero(), |acc, (_, m, c)| acc + c.clone() * unit_monomial_integral::<S>(cell.kind, &m.0[..d]));
    Ok(total * jac.abs())
}
