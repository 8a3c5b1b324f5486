use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use faer::linalg::triangular_solve::solve_upper_triangular_in_place;
use faer::{Mat, MatRef, Par};

use super::{dimension_certificate, generators, DimensionCertificate, FamilySpec};
use crate::error::{Error, Result};
use crate::forms::{n_components, pullback, AffineMap, FormBatch, Point, PolyForm};
use crate::linalg::{cholesky, compound, solve_lower_transpose};
use crate::mesh::Mesh;
use crate::quadrature::QuadRule;

/// Basis of the family on the reference cell, orthonormal in L² there.
/// Coefficients are polynomials in the centered reference coordinates.
#[derive(Debug)]
pub struct ReferenceBasis {
    pub spec: FamilySpec,
    pub certificate: DimensionCertificate,
    batch: FormBatch,
    dbatch: Option<FormBatch>,
}

impl ReferenceBasis {
    pub fn dim(&self) -> usize {
        self.batch.len()
    }

    pub fn batch(&self) -> &FormBatch {
        &self.batch
    }

    pub fn dbatch(&self) -> Option<&FormBatch> {
        self.dbatch.as_ref()
    }

    pub fn forms(&self) -> Vec<PolyForm<f64>> {
        self.batch.to_forms()
    }

    /// Reference quadrature exact for products of two basis coefficients.
    pub fn mass_rule(&self) -> QuadRule {
        QuadRule::reference(self.spec.cell_kind(), self.spec.dim, 2 * self.spec.max_poly_degree())
    }
}

/// Square-root-weighted values: rows (q·n_comp + c) scaled by √w_q.
fn weighted_values(batch: &FormBatch, rule: &QuadRule) -> Mat<f64> {
    let mut v = batch.eval(&rule.points);
    let nc = batch.n_components();
    for (q, w) in rule.weights.iter().enumerate() {
        let s = w.sqrt();
        for c in 0..nc {
            for j in 0..v.ncols() {
                v[(q * nc + c, j)] *= s;
            }
        }
    }
    v
}

/// R⁻¹ from a thin QR of the weighted value matrix, so batch·R⁻¹ is orthonormal.
fn qr_orthonormalizer(v: MatRef<'_, f64>) -> Mat<f64> {
    let n = v.ncols();
    let qr = v.qr();
    let r = qr.thin_R().to_owned();
    let mut t = Mat::<f64>::identity(n, n);
    solve_upper_triangular_in_place(r.as_ref(), t.as_mut(), Par::Seq);
    t
}

fn build_reference(spec: &FamilySpec) -> ReferenceBasis {
    let certificate = dimension_certificate(spec);
    let gens = generators::<crate::scalar::Rational>(spec);
    let chosen: Vec<PolyForm<f64>> = certificate.independent.iter().map(|&i| gens[i].to_f64()).collect();
    // Generators are monomials in the unit-cell variables x̂; rewrite them in
    // the centered variable ξ = 2x̂ − 1 before orthonormalizing.
    let d = spec.dim;
    let half = AffineMap::new(
        (0..d).map(|i| (0..d).map(|j| if i == j { 0.5 } else { 0.0 }).collect()).collect(),
        vec![0.5; d],
    )
    .expect("invertible");
    let centered: Vec<PolyForm<f64>> = chosen.iter().map(|g| pullback(&half, g).expect("same dimension")).collect();
    let mut batch = FormBatch::new(spec.cell_kind(), d, spec.form_degree, &centered);
    let rule = QuadRule::reference(spec.cell_kind(), d, 2 * spec.max_poly_degree());
    for _ in 0..2 {
        let t = qr_orthonormalizer(weighted_values(&batch, &rule).as_ref());
        batch = batch.combine(t.as_ref());
    }
    let dbatch = batch.derivative();
    ReferenceBasis { spec: *spec, certificate, batch, dbatch }
}

/// Cached reference basis for a family spec.
pub fn reference_basis(spec: &FamilySpec) -> Arc<ReferenceBasis> {
    static CACHE: OnceLock<Mutex<HashMap<FamilySpec, Arc<ReferenceBasis>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(b) = cache.lock().expect("cache lock").get(spec) {
        return b.clone();
    }
    let built = Arc::new(build_reference(spec));
    cache.lock().expect("cache lock").entry(*spec).or_insert(built).clone()
}

/// Apply a per-point component map: rows (q·n_in + c) become (q·n_out + r)
/// with values Σ_c map[(r, c)]·v[(q·n_in + c, j)].
pub fn apply_component_map(values: MatRef<'_, f64>, map: MatRef<'_, f64>) -> Mat<f64> {
    let (n_out, n_in) = (map.nrows(), map.ncols());
    let nq = if n_in == 0 { 0 } else { values.nrows() / n_in };
    let mut out = Mat::<f64>::zeros(nq * n_out, values.ncols());
    for q in 0..nq {
        let block = values.subrows(q * n_in, n_in);
        let prod = map * block;
        out.subrows_mut(q * n_out, n_out).copy_from(&prod);
    }
    out
}

/// Basis of W^ℓ_p(K), orthonormal in L²(K).
#[derive(Clone, Debug)]
pub struct LocalBasis {
    pub spec: FamilySpec,
    pub cell: usize,
    reference: Arc<ReferenceBasis>,
    map: AffineMap<f64>,
    jacobian: f64,
    /// Physical components from reference components: C_ℓ(A⁻¹)ᵀ.
    to_physical: Mat<f64>,
    /// Same for (ℓ+1)-forms.
    to_physical_d: Mat<f64>,
    /// Columns express local basis forms in the reference basis.
    transform: Mat<f64>,
    batch: FormBatch,
    dbatch: Option<FormBatch>,
}

/// Local space on cell `k` of the mesh.
pub fn local_space(mesh: &Mesh, k: usize, spec: &FamilySpec) -> Result<LocalBasis> {
    spec.check_kind(mesh.kind())?;
    if spec.dim != mesh.dim() {
        return Err(Error::InvalidSpec(format!("{spec} on a {}-dimensional mesh", mesh.dim())));
    }
    if k >= mesh.n_cells() {
        return Err(Error::InvalidArgument(format!("cell {k} does not exist")));
    }
    LocalBasis::on_map(mesh.cell_map(k).clone(), k, spec)
}

impl LocalBasis {
    /// Local space on the image of the reference cell under `map`.
    pub fn on_map(map: AffineMap<f64>, cell: usize, spec: &FamilySpec) -> Result<Self> {
        let reference = reference_basis(spec);
        let d = spec.dim;
        let l = spec.form_degree;
        let inv = map.inverse();
        let to_physical = compound(inv.matrix(), l).transpose().to_owned();
        let to_physical_d = if l < d { compound(inv.matrix(), l + 1).transpose().to_owned() } else { Mat::zeros(0, 0) };
        let jacobian = map.det().abs();
        let rule = reference.mass_rule();
        let vals = apply_component_map(reference.batch.eval(&rule.points).as_ref(), to_physical.as_ref());
        let nc = n_components(d, l);
        let mut weighted = vals.clone();
        for (q, w) in rule.weights.iter().enumerate() {
            let s = (w * jacobian).sqrt();
            for c in 0..nc {
                for j in 0..weighted.ncols() {
                    weighted[(q * nc + c, j)] *= s;
                }
            }
        }
        let gram = weighted.transpose() * &weighted;
        let lfac = cholesky(gram.as_ref()).ok_or_else(|| Error::SingularFacetSystem {
            cell,
            msg: "local Gram matrix is not positive definite".into(),
        })?;
        let n = reference.dim();
        let mut transform = Mat::<f64>::identity(n, n);
        solve_lower_transpose(lfac.as_ref(), &mut transform);
        let batch = reference.batch.combine(transform.as_ref());
        let dbatch = reference.dbatch.as_ref().map(|b| b.combine(transform.as_ref()));
        Ok(LocalBasis { spec: *spec, cell, reference, map, jacobian, to_physical, to_physical_d, transform, batch, dbatch })
    }

    pub fn dim(&self) -> usize {
        self.batch.len()
    }

    pub fn certificate(&self) -> &DimensionCertificate {
        &self.reference.certificate
    }

    pub fn map(&self) -> &AffineMap<f64> {
        &self.map
    }

    pub fn jacobian(&self) -> f64 {
        self.jacobian
    }

    pub fn transform(&self) -> &Mat<f64> {
        &self.transform
    }

    /// Basis forms in centered reference coordinates.
    pub fn batch(&self) -> &FormBatch {
        &self.batch
    }

    pub fn dbatch(&self) -> Option<&FormBatch> {
        self.dbatch.as_ref()
    }

    pub fn to_physical(&self) -> &Mat<f64> {
        &self.to_physical
    }

    pub fn to_physical_d(&self) -> &Mat<f64> {
        &self.to_physical_d
    }

    /// Basis forms in reference coordinates.
    pub fn reference_forms(&self) -> Vec<PolyForm<f64>> {
        self.batch.to_forms()
    }

    /// Basis forms in physical coordinates.
    pub fn forms(&self) -> Vec<PolyForm<f64>> {
        let inv = self.map.inverse();
        self.batch.to_forms().iter().map(|f| pullback(&inv, f).expect("same dimension")).collect()
    }

    /// Physical component values at reference points.
    pub fn eval(&self, points: &[Point]) -> Mat<f64> {
        apply_component_map(self.batch.eval(points).as_ref(), self.to_physical.as_ref())
    }

    /// Physical component values of the exterior derivatives.
    pub fn eval_d(&self, points: &[Point]) -> Option<Mat<f64>> {
        self.dbatch.as_ref().map(|b| apply_component_map(b.eval(points).as_ref(), self.to_physical_d.as_ref()))
    }

    /// Physical point of a reference point.
    pub fn physical_point(&self, xi: &Point) -> Point {
        let d = self.spec.dim;
        let x = self.map.apply(&xi[..d]);
        let mut p = [0.0; 3];
        p[..d].copy_from_slice(&x);
        p
    }
}
