use faer::Mat;

use super::ConformingSpace;
use crate::forms::Point;
use crate::interp::FormField;
use crate::mesh::CellKind;

/// A member of a conforming space sampled pointwise through the cell that
/// contains the point.
pub struct DiscreteField<'a> {
    space: &'a ConformingSpace,
    broken: Vec<f64>,
}

impl ConformingSpace {
    /// The form with global coefficients `coeffs` in the orthonormal basis.
    pub fn field(&self, coeffs: &[f64]) -> DiscreteField<'_> {
        let c = Mat::from_fn(coeffs.len(), 1, |i, _| coeffs[i]);
        let b = self.broken(c.as_ref());
        DiscreteField { space: self, broken: (0..b.nrows()).map(|i| b[(i, 0)]).collect() }
    }
}

impl DiscreteField<'_> {
    fn sample(&self, x: &Point, on_d: bool) -> Vec<f64> {
        let mesh = self.space.mesh();
        let d = mesh.dim();
        let tol = 1e-12;
        for (k, b) in self.space.local_bases().iter().enumerate() {
            let xi = b.map().inverse().apply(&x[..d]);
            let inside = match mesh.kind() {
                CellKind::Simplex => xi.iter().all(|&t| t >= -1.0 - tol) && xi.iter().sum::<f64>() <= 2.0 - d as f64 + tol,
                CellKind::Cube => xi.iter().all(|&t| t.abs() <= 1.0 + tol),
            };
            if !inside {
                continue;
            }
            let mut p = [0.0; 3];
            p[..d].copy_from_slice(&xi);
            let v = if on_d {
                match b.eval_d(&[p]) {
                    Some(v) => v,
                    None => return Vec::new(),
                }
            } else {
                b.eval(&[p])
            };
            let c = &self.broken[self.space.cell_range(k)];
            return (0..v.nrows()).map(|r| (0..v.ncols()).map(|j| v[(r, j)] * c[j]).sum()).collect();
        }
        panic!("point {x:?} lies outside the mesh");
    }
}

impl FormField for DiscreteField<'_> {
    fn dim(&self) -> usize {
        self.space.mesh().dim()
    }

    fn degree(&self) -> usize {
        self.space.spec().form_degree
    }

    fn eval(&self, x: &Point) -> Vec<f64> {
        self.sample(x, false)
    }

    fn eval_d(&self, x: &Point) -> Vec<f64> {
        self.sample(x, true)
    }
}
