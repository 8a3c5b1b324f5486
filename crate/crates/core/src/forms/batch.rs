use std::collections::BTreeSet;
use std::sync::Arc;

use faer::{Mat, MatRef};

use super::modal::ModalBasis;
use super::{n_components, FormIndex, Monomial, PolyForm};
use crate::mesh::CellKind;
use crate::quadrature::QuadRule;

/// Point in up to three dimensions; unused coordinates are zero.
pub type Point = [f64; 3];

/// A list of float forms of one type on a reference cell, stored as dense
/// coefficient matrices over an orthonormal modal basis.
#[derive(Clone, Debug)]
pub struct FormBatch {
    degree: usize,
    n_forms: usize,
    basis: Arc<ModalBasis>,
    /// Per component: n_forms × n_modes.
    coeffs: Vec<Mat<f64>>,
}

/// Values of monomial forms at points, laid out as in [`FormBatch::eval`].
fn eval_forms(dim: usize, degree: usize, forms: &[PolyForm<f64>], points: &[Point]) -> Mat<f64> {
    let set: BTreeSet<Monomial> = forms.iter().flat_map(|f| f.terms().map(|(_, m, _)| m)).collect();
    let monomials: Vec<Monomial> = set.into_iter().collect();
    let indices = FormIndex::all(dim, degree);
    let nc = indices.len();
    let max_e = monomials.iter().flat_map(|m| m.0).max().unwrap_or(0) as usize;
    let mut table = Mat::<f64>::zeros(monomials.len(), points.len());
    let mut pows = vec![[0.0f64; 3]; max_e + 1];
    for (q, x) in points.iter().enumerate() {
        for (i, xi) in x.iter().enumerate() {
            let mut acc = 1.0;
            for row in pows.iter_mut() {
                row[i] = acc;
                acc *= xi;
            }
        }
        for (k, m) in monomials.iter().enumerate() {
            table[(k, q)] = pows[m.0[0] as usize][0] * pows[m.0[1] as usize][1] * pows[m.0[2] as usize][2];
        }
    }
    let mut out = Mat::<f64>::zeros(points.len() * nc, forms.len());
    for (j, f) in forms.iter().enumerate() {
        assert_eq!((f.dim(), f.degree()), (dim, degree), "batch of mixed form types");
        for (idx, m, c) in f.terms() {
            let comp = indices.iter().position(|&i| i == idx).unwrap();
            let row = monomials.binary_search(&m).unwrap();
            for q in 0..points.len() {
                out[(q * nc + comp, j)] += c * table[(row, q)];
            }
        }
    }
    out
}

impl FormBatch {
    /// Batch of forms given in the centered reference coordinates of a cell
    /// of the given kind.
    pub fn new(kind: CellKind, dim: usize, degree: usize, forms: &[PolyForm<f64>]) -> Self {
        let max = match kind {
            CellKind::Simplex => forms.iter().map(|f| f.poly_degree()).max().unwrap_or(0),
            CellKind::Cube => forms.iter().map(|f| f.max_exponent()).max().unwrap_or(0),
        };
        let basis = ModalBasis::get(kind, dim, max);
        let rule = QuadRule::reference(kind, dim, 2 * max);
        let vals = eval_forms(dim, degree, forms, &rule.points);
        let psi = basis.eval(&rule.points);
        let nc = n_components(dim, degree);
        let indices = FormIndex::all(dim, degree);
        let coeffs = (0..nc)
            .map(|c| {
                let mut g = Mat::<f64>::zeros(rule.len(), forms.len());
                for q in 0..rule.len() {
                    for j in 0..forms.len() {
                        g[(q, j)] = rule.weights[q] * vals[(q * nc + c, j)];
                    }
                }
                let mut coeffs = (&psi * &g).transpose().to_owned();
                // Modes a component cannot reach are quadrature roundoff.
                for (j, f) in forms.iter().enumerate() {
                    let comp = f.component(indices[c]);
                    for (k, mode) in basis.modes().iter().enumerate() {
                        let reachable = comp.terms().any(|(m, _)| match kind {
                            CellKind::Simplex => mode.degree() <= m.degree(),
                            CellKind::Cube => (0..dim).all(|a| mode.0[a] <= m.0[a]),
                        });
                        if !reachable {
                            coeffs[(j, k)] = 0.0;
                        }
                    }
                }
                coeffs
            })
            .collect();
        FormBatch { degree, n_forms: forms.len(), basis, coeffs }
    }

    pub fn len(&self) -> usize {
        self.n_forms
    }

    pub fn is_empty(&self) -> bool {
        self.n_forms == 0
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_components(&self) -> usize {
        n_components(self.dim(), self.degree)
    }

    pub fn basis(&self) -> &ModalBasis {
        &self.basis
    }

    /// Per component, the n_forms × n_modes coefficient matrix.
    pub fn coefficients(&self) -> &[Mat<f64>] {
        &self.coeffs
    }

    /// Component values at `points`: entry (q·n_comp + c, j) is component c of
    /// form j at point q.
    pub fn eval(&self, points: &[Point]) -> Mat<f64> {
        let nc = self.n_components();
        let nq = points.len();
        let table = self.basis.eval(points);
        let mut out = Mat::<f64>::zeros(nq * nc, self.n_forms);
        for (c, cm) in self.coeffs.iter().enumerate() {
            let vals = cm * &table;
            for q in 0..nq {
                for j in 0..self.n_forms {
                    out[(q * nc + c, j)] = vals[(j, q)];
                }
            }
        }
        out
    }

    /// Forms g_k = Σ_j t[(j, k)] f_j.
    pub fn combine(&self, t: MatRef<'_, f64>) -> FormBatch {
        assert_eq!(t.nrows(), self.n_forms);
        let coeffs = self.coeffs.iter().map(|c| t.transpose() * c).collect();
        FormBatch { degree: self.degree, n_forms: t.ncols(), basis: self.basis.clone(), coeffs }
    }

    /// The forms in monomial coefficients.
    pub fn to_forms(&self) -> Vec<PolyForm<f64>> {
        let indices = FormIndex::all(self.dim(), self.degree);
        let polys = self.basis.polynomials();
        (0..self.n_forms)
            .map(|j| {
                let mut f = PolyForm::zero(self.dim(), self.degree);
                for (c, idx) in indices.iter().enumerate() {
                    for (k, poly) in polys.iter().enumerate() {
                        let a = self.coeffs[c][(j, k)];
                        if a == 0.0 {
                            continue;
                        }
                        for (m, pc) in poly.terms() {
                            f.add_term(*idx, *m, a * pc);
                        }
                    }
                }
                f
            })
            .collect()
    }

    /// Batch of exterior derivatives; `None` when the degree equals the dimension.
    pub fn derivative(&self) -> Option<FormBatch> {
        let dim = self.dim();
        if self.degree >= dim {
            return None;
        }
        let from = FormIndex::all(dim, self.degree);
        let to = FormIndex::all(dim, self.degree + 1);
        let n = self.basis.len();
        let mut coeffs: Vec<Mat<f64>> = (0..to.len()).map(|_| Mat::zeros(self.n_forms, n)).collect();
        for (c, idx) in from.iter().enumerate() {
            for axis in (0..dim).filter(|&a| !idx.contains(a)) {
                let target = to.iter().position(|&i| i == idx.with(axis)).unwrap();
                let sign = if idx.count_below(axis) % 2 == 0 { 1.0 } else { -1.0 };
                let part = &self.coeffs[c] * self.basis.derivative(axis).transpose();
                coeffs[target] += sign * part;
            }
        }
        Some(FormBatch { degree: self.degree + 1, n_forms: self.n_forms, basis: self.basis.clone(), coeffs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::exterior_derivative;

    fn sample() -> Vec<PolyForm<f64>> {
        let a = PolyForm::from_terms(3, 1, [(&[0usize][..], &[3u8, 1, 0][..], 1.5), (&[2], &[0, 2, 2], -0.5)]).unwrap();
        let b = PolyForm::from_terms(3, 1, [(&[1usize][..], &[0u8, 0, 4][..], 2.0), (&[0], &[1, 1, 1], 0.25)]).unwrap();
        vec![a, b]
    }

    #[test]
    fn evaluation_matches_forms() {
        let forms = sample();
        let pts = [[0.3, -0.7, 0.1], [-0.9, 0.2, 0.8]];
        for kind in [CellKind::Cube, CellKind::Simplex] {
            let v = FormBatch::new(kind, 3, 1, &forms).eval(&pts);
            for (q, p) in pts.iter().enumerate() {
                for (j, f) in forms.iter().enumerate() {
                    let exact = f.eval(p);
                    for c in 0..3 {
                        assert!((v[(q * 3 + c, j)] - exact[c]).abs() < 1e-12, "{kind:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn round_trip_and_derivative() {
        let forms = sample();
        for kind in [CellKind::Cube, CellKind::Simplex] {
            let batch = FormBatch::new(kind, 3, 1, &forms);
            for (f, g) in forms.iter().zip(batch.to_forms()) {
                assert!((f - &g).max_abs_coefficient() < 1e-11, "{kind:?}");
            }
            let db = batch.derivative().unwrap().to_forms();
            for (f, g) in forms.iter().zip(db) {
                assert!((&exterior_derivative(f).unwrap() - &g).max_abs_coefficient() < 1e-11, "{kind:?}");
            }
        }
    }
}
