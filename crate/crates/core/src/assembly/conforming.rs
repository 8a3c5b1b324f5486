use faer::{Mat, MatRef};

use crate::error::Result;
use crate::forms::Point;
use crate::linalg::{frobenius, orthonormal_complement, range_basis, DEFAULT_RANK_TOL};
use crate::mesh::Mesh;
use crate::quadrature::QuadRule;
use crate::spaces::{apply_component_map, local_space, trace_minors, FamilySpec, LocalBasis};

/// Global space of piecewise forms with continuous traces and vanishing
/// boundary trace, as an orthonormal basis of broken coefficient vectors.
#[derive(Clone, Debug)]
pub struct ConformingSpace {
    mesh: Mesh,
    spec: FamilySpec,
    bases: Vec<LocalBasis>,
    offsets: Vec<usize>,
    /// N_b × N, orthonormal columns.
    embedding: Mat<f64>,
}

/// Weighted facet trace rows of one cell's local basis on a facet given by
/// physical quadrature points and physical axes.
fn facet_rows(basis: &LocalBasis, points: &[Point], sqrt_w: &[f64], axes: &[Vec<f64>]) -> Mat<f64> {
    let d = basis.spec.dim;
    let inv = basis.map().inverse();
    let xi: Vec<Point> = points
        .iter()
        .map(|x| {
            let r = inv.apply(&x[..d]);
            let mut p = [0.0; 3];
            p[..d].copy_from_slice(&r);
            p
        })
        .collect();
    let minors = trace_minors(axes, basis.spec.form_degree);
    let mut t = apply_component_map(basis.eval(&xi).as_ref(), minors.as_ref());
    let nt = minors.nrows();
    for (q, s) in sqrt_w.iter().enumerate() {
        for c in 0..nt {
            for j in 0..t.ncols() {
                t[(q * nt + c, j)] *= s;
            }
        }
    }
    t
}

impl ConformingSpace {
    pub fn build(mesh: &Mesh, spec: &FamilySpec) -> Result<Self> {
        let bases = (0..mesh.n_cells()).map(|k| local_space(mesh, k, spec)).collect::<Result<Vec<_>>>()?;
        let mut offsets = Vec::with_capacity(bases.len() + 1);
        offsets.push(0);
        for b in &bases {
            offsets.push(offsets.last().unwrap() + b.dim());
        }
        let n_broken = *offsets.last().unwrap();
        let d = mesh.dim();
        let l = spec.form_degree;
        let mut blocks: Vec<(Vec<usize>, Mat<f64>)> = Vec::new();
        if l < d {
            let rule = QuadRule::unit(mesh.kind(), d - 1, 2 * spec.max_poly_degree() + 2);
            let sqrt_w: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
            for (fi, facet) in mesh.facets(d - 1).iter().enumerate() {
                let verts: Vec<Point> = facet.frame.iter().map(|&v| mesh.vertices()[v]).collect();
                let axes: Vec<Vec<f64>> = verts[1..].iter().map(|v| (0..d).map(|i| v[i] - verts[0][i]).collect()).collect();
                let points: Vec<Point> = rule
                    .points
                    .iter()
                    .map(|s| {
                        let mut x = verts[0];
                        for (j, a) in axes.iter().enumerate() {
                            for i in 0..d {
                                x[i] += s[j] * a[i];
                            }
                        }
                        x
                    })
                    .collect();
                let cells = mesh.facet_cells(fi);
                let parts: Vec<Mat<f64>> = cells.iter().map(|&k| facet_rows(&bases[k], &points, &sqrt_w, &axes)).collect();
                let width: usize = cells.iter().map(|&k| bases[k].dim()).sum();
                let mut jump = Mat::<f64>::zeros(parts[0].nrows(), width);
                let mut col = 0;
                for (i, p) in parts.iter().enumerate() {
                    let sign = if i == 0 { 1.0 } else { -1.0 };
                    for r in 0..p.nrows() {
                        for c in 0..p.ncols() {
                            jump[(r, col + c)] = sign * p[(r, c)];
                        }
                    }
                    col += p.ncols();
                }
                // Keep an orthonormal basis of the row space of the jump.
                let (rows, _) = range_basis(jump.transpose(), DEFAULT_RANK_TOL, DEFAULT_RANK_TOL * frobenius(jump.as_ref()));
                if rows.ncols() > 0 {
                    let cols: Vec<usize> = cells.iter().flat_map(|&k| offsets[k]..offsets[k + 1]).collect();
                    blocks.push((cols, rows.transpose().to_owned()));
                }
            }
        }
        let n_rows: usize = blocks.iter().map(|(_, b)| b.nrows()).sum();
        let mut constraints = Mat::<f64>::zeros(n_rows, n_broken);
        let mut r0 = 0;
        for (cols, b) in &blocks {
            for r in 0..b.nrows() {
                for (j, &c) in cols.iter().enumerate() {
                    constraints[(r0 + r, c)] = b[(r, j)];
                }
            }
            r0 += b.nrows();
        }
        let embedding = orthonormal_complement(constraints.transpose(), DEFAULT_RANK_TOL);
        Ok(ConformingSpace { mesh: mesh.clone(), spec: *spec, bases, offsets, embedding })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }

    /// Conforming dimension N.
    pub fn dim(&self) -> usize {
        self.embedding.ncols()
    }

    /// Broken dimension N_b.
    pub fn broken_dim(&self) -> usize {
        self.embedding.nrows()
    }

    pub fn local_bases(&self) -> &[LocalBasis] {
        &self.bases
    }

    /// Range of broken coefficients owned by cell k.
    pub fn cell_range(&self, k: usize) -> std::ops::Range<usize> {
        self.offsets[k]..self.offsets[k + 1]
    }

    pub fn embedding(&self) -> &Mat<f64> {
        &self.embedding
    }

    /// Broken coefficients of conforming coefficient vectors (columns).
    pub fn broken(&self, coeffs: MatRef<'_, f64>) -> Mat<f64> {
        &self.embedding * coeffs
    }

    /// Largest trace jump or boundary trace of a broken coefficient vector
    /// over all (d−1)-facets, as a weighted L² norm per facet.
    pub fn conformity_residual(&self, broken: &[f64]) -> f64 {
        let d = self.mesh.dim();
        if self.spec.form_degree >= d {
            return 0.0;
        }
        let rule = QuadRule::unit(self.mesh.kind(), d - 1, 2 * self.spec.max_poly_degree() + 4);
        let sqrt_w: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
        let mut worst: f64 = 0.0;
        for (fi, facet) in self.mesh.facets(d - 1).iter().enumerate() {
            let verts: Vec<Point> = facet.frame.iter().map(|&v| self.mesh.vertices()[v]).collect();
            let axes: Vec<Vec<f64>> = verts[1..].iter().map(|v| (0..d).map(|i| v[i] - verts[0][i]).collect()).collect();
            let points: Vec<Point> = rule
                .points
                .iter()
                .map(|s| {
                    let mut x = verts[0];
                    for (j, a) in axes.iter().enumerate() {
                        for i in 0..d {
                            x[i] += s[j] * a[i];
                        }
                    }
                    x
                })
                .collect();
            let mut jump: Option<Vec<f64>> = None;
            for (i, &k) in self.mesh.facet_cells(fi).iter().enumerate() {
                let t = facet_rows(&self.bases[k], &points, &sqrt_w, &axes);
                let c = &broken[self.cell_range(k)];
                let v: Vec<f64> = (0..t.nrows()).map(|r| (0..t.ncols()).map(|j| t[(r, j)] * c[j]).sum()).collect();
                let sign = if i == 0 { 1.0 } else { -1.0 };
                match &mut jump {
                    None => jump = Some(v.iter().map(|x| sign * x).collect()),
                    Some(acc) => acc.iter_mut().zip(&v).for_each(|(a, x)| *a += sign * x),
                }
            }
            if let Some(j) = jump {
                worst = worst.max(j.iter().map(|x| x * x).sum::<f64>().sqrt());
            }
        }
        worst
    }
}
