use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{Mat, MatRef};

use super::field::{Derivative, FormField};
use crate::error::{Error, Result};
use crate::forms::{n_components, Point};
use crate::linalg::{compound, frobenius, null_space, numerical_rank, range_basis, DEFAULT_RANK_TOL};
use crate::mesh::{local_facet_vertices, local_facets, reference_vertex, Mesh};
use crate::quadrature::QuadRule;
use crate::spaces::{apply_component_map, local_space, trace_minors, FamilySpec, LocalBasis};

/// Quadrature points and trace maps of one local facet, in reference coordinates.
#[derive(Clone, Debug)]
struct FacetData {
    dim: usize,
    vertices: Vec<usize>,
    points: Vec<Point>,
    sqrt_w: Vec<f64>,
    /// Reference ℓ-form components to facet trace components.
    minors: Mat<f64>,
    /// Same for (ℓ+1)-forms; zero rows when ℓ + 1 exceeds the facet dimension.
    minors_d: Mat<f64>,
}

impl FacetData {
    fn weighted(&self, vals: MatRef<'_, f64>, minors: MatRef<'_, f64>) -> Mat<f64> {
        let mut t = apply_component_map(vals, minors);
        let nt = minors.nrows();
        for (q, s) in self.sqrt_w.iter().enumerate() {
            for c in 0..nt {
                for j in 0..t.ncols() {
                    t[(q * nt + c, j)] *= s;
                }
            }
        }
        t
    }
}

/// One block of test functionals: rows act on weighted trace values of the
/// form (`on_d = false`) or of its derivative.
#[derive(Clone, Debug)]
struct TestBlock {
    facet: usize,
    on_d: bool,
    tests: Mat<f64>,
}

/// Projection-based interpolation onto W^ℓ_p(K) by a sweep over the facets
/// of dimension ℓ..d.
#[derive(Clone, Debug)]
pub struct Projector {
    spec: FamilySpec,
    cell: usize,
    basis: LocalBasis,
    facets: Vec<FacetData>,
    blocks: Vec<TestBlock>,
    /// Physical components to reference components for ℓ- and (ℓ+1)-forms.
    pull: Mat<f64>,
    pull_d: Mat<f64>,
    lu: PartialPivLu<f64>,
}

fn facet_rule(m: usize, kind: crate::mesh::CellKind, degree: usize) -> QuadRule {
    if m == 0 {
        return QuadRule { dim: 0, points: vec![[0.0; 3]], weights: vec![1.0] };
    }
    QuadRule::unit(kind, m, degree)
}

impl Projector {
    pub fn new(mesh: &Mesh, cell: usize, spec: &FamilySpec) -> Result<Self> {
        let basis = local_space(mesh, cell, spec)?;
        let (d, l, p) = (spec.dim, spec.form_degree, spec.degree);
        let kind = spec.cell_kind();
        let degree = (2 * p + 6).max(2 * spec.max_poly_degree() + 2);
        let mut facets = Vec::new();
        for m in l..=d {
            for frame in local_facets(kind, d, m) {
                let verts: Vec<Point> = frame.iter().map(|&v| reference_vertex(kind, d, v)).collect();
                let axes: Vec<Vec<f64>> = verts[1..].iter().map(|v| (0..d).map(|i| v[i] - verts[0][i]).collect()).collect();
                let rule = facet_rule(m, kind, degree);
                let points = rule
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
                let minors = trace_minors(&axes, l);
                let minors_d = if l < d { trace_minors(&axes, l + 1) } else { Mat::zeros(0, 0) };
                let mut vertices = local_facet_vertices(kind, &frame);
                vertices.sort_unstable();
                facets.push(FacetData {
                    dim: m,
                    vertices,
                    points,
                    sqrt_w: rule.weights.iter().map(|w| w.sqrt()).collect(),
                    minors,
                    minors_d,
                });
            }
        }
        let n = basis.dim();
        let batch = basis.batch();
        let traces: Vec<Mat<f64>> =
            facets.iter().map(|f| f.weighted(batch.eval(&f.points).as_ref(), f.minors.as_ref())).collect();
        let mut blocks = Vec::new();
        let mut rows: Vec<Mat<f64>> = Vec::new();
        for (fi, f) in facets.iter().enumerate() {
            // Bubbles: coefficient vectors with vanishing trace on ∂F.
            let sub: Vec<usize> = (0..facets.len())
                .filter(|&g| facets[g].dim + 1 == f.dim && facets[g].vertices.iter().all(|v| f.vertices.contains(v)))
                .collect();
            let n_sub_rows: usize = sub.iter().map(|&g| traces[g].nrows()).sum();
            let mut stacked = Mat::<f64>::zeros(n_sub_rows, n);
            let mut r = 0;
            for &g in &sub {
                stacked.subrows_mut(r, traces[g].nrows()).copy_from(&traces[g]);
                r += traces[g].nrows();
            }
            let bubbles = null_space(stacked.as_ref(), DEFAULT_RANK_TOL);
            let tw = &traces[fi];
            if f.dim == l {
                let (u, _) = range_basis((tw * &bubbles).as_ref(), DEFAULT_RANK_TOL, DEFAULT_RANK_TOL * frobenius(tw.as_ref()));
                rows.push(u.transpose() * tw);
                blocks.push(TestBlock { facet: fi, on_d: false, tests: u.transpose().to_owned() });
                continue;
            }
            let dbatch = basis.dbatch().expect("ℓ below facet dimension");
            let td = f.weighted(dbatch.eval(&f.points).as_ref(), f.minors_d.as_ref());
            let g = &td * &bubbles;
            let (u1, _) = range_basis(g.as_ref(), DEFAULT_RANK_TOL, DEFAULT_RANK_TOL * frobenius(td.as_ref()));
            rows.push(u1.transpose() * &td);
            blocks.push(TestBlock { facet: fi, on_d: true, tests: u1.transpose().to_owned() });
            let closed = &bubbles * null_space(g.as_ref(), DEFAULT_RANK_TOL);
            let (u2, _) = range_basis((tw * &closed).as_ref(), DEFAULT_RANK_TOL, DEFAULT_RANK_TOL * frobenius(tw.as_ref()));
            rows.push(u2.transpose() * tw);
            blocks.push(TestBlock { facet: fi, on_d: false, tests: u2.transpose().to_owned() });
        }
        let total: usize = rows.iter().map(|r| r.nrows()).sum();
        if total != n {
            return Err(Error::SingularFacetSystem {
                cell,
                msg: format!("{total} facet functionals for a space of dimension {n}"),
            });
        }
        let mut a = Mat::<f64>::zeros(n, n);
        let mut r = 0;
        for block in &rows {
            a.subrows_mut(r, block.nrows()).copy_from(block);
            r += block.nrows();
        }
        if numerical_rank(a.as_ref(), 1e-13) < n {
            return Err(Error::SingularFacetSystem { cell, msg: "facet functionals are linearly dependent".into() });
        }
        let jac = mesh.cell_map(cell).matrix().to_vec();
        let pull = compound(&jac, l).transpose().to_owned();
        let pull_d = if l < d { compound(&jac, l + 1).transpose().to_owned() } else { Mat::zeros(0, 0) };
        let lu = a.partial_piv_lu();
        Ok(Projector { spec: *spec, cell, basis, facets, blocks, pull, pull_d, lu })
    }

    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }

    pub fn cell(&self) -> usize {
        self.cell
    }

    pub fn basis(&self) -> &LocalBasis {
        &self.basis
    }

    /// Reference components of u (or du) at the reference points of a facet.
    fn sample(&self, u: &dyn FormField, f: &FacetData, on_d: bool) -> Mat<f64> {
        let (d, l) = (self.spec.dim, self.spec.form_degree);
        let nc = n_components(d, if on_d { l + 1 } else { l });
        let mut vals = Mat::<f64>::zeros(f.points.len() * nc, 1);
        for (q, xi) in f.points.iter().enumerate() {
            let x = self.basis.physical_point(xi);
            let v = if on_d { u.eval_d(&x) } else { u.eval(&x) };
            for c in 0..nc {
                vals[(q * nc + c, 0)] = v[c];
            }
        }
        apply_component_map(vals.as_ref(), if on_d { self.pull_d.as_ref() } else { self.pull.as_ref() })
    }

    /// Coefficients of Πu in the local orthonormal basis.
    pub fn project(&self, u: &dyn FormField) -> Result<Vec<f64>> {
        if u.dim() != self.spec.dim || u.degree() != self.spec.form_degree {
            return Err(Error::DimensionMismatch(format!(
                "{}-form on R^{} projected onto {}",
                u.degree(),
                u.dim(),
                self.spec
            )));
        }
        let n = self.basis.dim();
        let mut b = Mat::<f64>::zeros(n, 1);
        let mut r = 0;
        for block in &self.blocks {
            let f = &self.facets[block.facet];
            let minors = if block.on_d { &f.minors_d } else { &f.minors };
            let t = f.weighted(self.sample(u, f, block.on_d).as_ref(), minors.as_ref());
            let rhs = &block.tests * &t;
            b.subrows_mut(r, rhs.nrows()).copy_from(&rhs);
            r += rhs.nrows();
        }
        let x = self.lu.solve(&b);
        Ok((0..n).map(|i| x[(i, 0)]).collect())
    }
}

/// L²(K) norm of (Σ_j c_j w_j) − u for a local basis {w_j}, or of the
/// derivatives when `on_d` holds.
pub fn l2_error(basis: &LocalBasis, coeffs: &[f64], u: Option<&dyn FormField>, on_d: bool, degree: usize) -> f64 {
    let s = &basis.spec;
    let rule = QuadRule::reference(s.cell_kind(), s.dim, degree);
    let vals = if on_d { basis.eval_d(&rule.points) } else { Some(basis.eval(&rule.points)) };
    let Some(vals) = vals else { return 0.0 };
    let nc = n_components(s.dim, s.form_degree + usize::from(on_d));
    let mut sum = 0.0;
    for (q, (xi, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
        let target = u.map(|u| {
            let x = basis.physical_point(xi);
            if on_d {
                u.eval_d(&x)
            } else {
                u.eval(&x)
            }
        });
        for c in 0..nc {
            let mut v: f64 = coeffs.iter().enumerate().map(|(j, cj)| cj * vals[(q * nc + c, j)]).sum();
            if let Some(t) = &target {
                v -= t[c];
            }
            sum += w * basis.jacobian() * v * v;
        }
    }
    sum.sqrt()
}

/// ‖dΠ^{ℓ−1}u − Π^ℓ du‖_{L²(K)} for an (ℓ−1)-form u; `spec` describes the
/// ℓ-form space.
pub fn check_commute(mesh: &Mesh, cell: usize, spec: &FamilySpec, u: &dyn FormField) -> Result<f64> {
    let lower = spec
        .companion()
        .ok_or_else(|| Error::InvalidSpec(format!("{spec} has no (ℓ−1)-form companion")))?;
    let pl = Projector::new(mesh, cell, &lower)?;
    let ph = Projector::new(mesh, cell, spec)?;
    commute_residual(&pl, &ph, u)
}

/// Commuting residual with prebuilt projectors for (ℓ−1, ℓ).
pub fn commute_residual(lower: &Projector, upper: &Projector, u: &dyn FormField) -> Result<f64> {
    let a = lower.project(u)?;
    let du = Derivative(u);
    let b = upper.project(&du)?;
    let s = &upper.spec;
    let degree = 2 * s.max_poly_degree().max(lower.spec.max_poly_degree()) + 2;
    let rule = QuadRule::reference(s.cell_kind(), s.dim, degree);
    let dl = lower.basis.eval_d(&rule.points).expect("companion has a derivative");
    let vu = upper.basis.eval(&rule.points);
    let nc = n_components(s.dim, s.form_degree);
    let mut sum = 0.0;
    for (q, w) in rule.weights.iter().enumerate() {
        for c in 0..nc {
            let row = q * nc + c;
            let x: f64 = a.iter().enumerate().map(|(j, cj)| cj * dl[(row, j)]).sum();
            let y: f64 = b.iter().enumerate().map(|(j, cj)| cj * vu[(row, j)]).sum();
            sum += w * upper.basis.jacobian() * (x - y) * (x - y);
        }
    }
    Ok(sum.sqrt())
}
