use faer::Mat;

use crate::error::{Error, Result};
use crate::forms::PolyForm;
use crate::linalg::compound;
use crate::mesh::Mesh;
use crate::scalar::Scalar;

/// Affine parametrization s ↦ origin + Σ s_j·axes[j] of a facet by the unit
/// m-simplex or unit m-cube.
#[derive(Clone, Debug, PartialEq)]
pub struct FacetFrame<S> {
    pub origin: Vec<S>,
    pub axes: Vec<Vec<S>>,
}

impl<S: Scalar> FacetFrame<S> {
    /// Frame from points: the origin followed by one point per axis.
    pub fn from_points(points: &[Vec<S>]) -> Self {
        let origin = points[0].clone();
        let axes = points[1..]
            .iter()
            .map(|p| p.iter().zip(&origin).map(|(a, b)| a.clone() - b.clone()).collect())
            .collect();
        FacetFrame { origin, axes }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// n × m matrix whose columns are the axes.
    pub fn matrix(&self) -> Vec<Vec<S>> {
        (0..self.origin.len()).map(|i| self.axes.iter().map(|a| a[i].clone()).collect()).collect()
    }

    pub fn point(&self, s: &[S]) -> Vec<S> {
        let mut x = self.origin.clone();
        for (sj, a) in s.iter().zip(&self.axes) {
            for (xi, ai) in x.iter_mut().zip(a) {
                *xi = xi.clone() + sj.clone() * ai.clone();
            }
        }
        x
    }

    pub fn trace(&self, u: &PolyForm<S>) -> PolyForm<S> {
        facet_trace(u, &self.origin, &self.axes)
    }
}

/// Pullback of `u` to the facet parameter domain. A form whose degree
/// exceeds the facet dimension has zero trace.
pub fn facet_trace<S: Scalar>(u: &PolyForm<S>, origin: &[S], axes: &[Vec<S>]) -> PolyForm<S> {
    let matrix: Vec<Vec<S>> = (0..u.dim()).map(|i| axes.iter().map(|a| a[i].clone()).collect()).collect();
    crate::forms::pullback_rect(u, &matrix, origin)
}

/// Trace of a form given in physical coordinates of cell `cell`, on its
/// m-facet with global index `facet`, in the facet's global frame.
pub fn mesh_facet_trace(mesh: &Mesh, cell: usize, m: usize, facet: usize, u: &PolyForm<f64>) -> Result<PolyForm<f64>> {
    if cell >= mesh.n_cells() || m > mesh.dim() || !mesh.cell_facets(cell, m).iter().any(|cf| cf.facet == facet) {
        return Err(Error::NotIncident { cell, dim: m, facet });
    }
    let d = mesh.dim();
    let points: Vec<Vec<f64>> = mesh.facets(m)[facet].frame.iter().map(|&v| mesh.vertices()[v][..d].to_vec()).collect();
    Ok(FacetFrame::from_points(&points).trace(u))
}

/// Matrix mapping cell components of an ℓ-form to trace components on a
/// facet with the given axes: C_ℓ(A)ᵀ for the n × m axis matrix A.
pub fn trace_minors(axes: &[Vec<f64>], l: usize) -> Mat<f64> {
    let n = axes.first().map_or(0, |a| a.len());
    let matrix: Vec<Vec<f64>> = (0..n).map(|i| axes.iter().map(|a| a[i]).collect()).collect();
    compound(&matrix, l).transpose().to_owned()
}
