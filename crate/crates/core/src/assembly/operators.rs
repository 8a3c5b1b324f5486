use std::path::Path;

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use super::ConformingSpace;
use crate::error::{Error, Result};
use crate::forms::n_components;
use crate::linalg::{cholesky, sym_eigen, symmetrize};
use crate::mesh::Mesh;

/// Per-cell symmetric positive definite tensors ε_K and μ_K, row-major d × d.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialField {
    pub dim: usize,
    pub eps: Vec<Vec<f64>>,
    pub mu: Vec<Vec<f64>>,
}

fn identity(d: usize) -> Vec<f64> {
    (0..d * d).map(|i| if i % (d + 1) == 0 { 1.0 } else { 0.0 }).collect()
}

fn as_mat(d: usize, t: &[f64]) -> Mat<f64> {
    Mat::from_fn(d, d, |i, j| t[i * d + j])
}

impl MaterialField {
    pub fn identity(n_cells: usize, dim: usize) -> Self {
        MaterialField { dim, eps: vec![identity(dim); n_cells], mu: vec![identity(dim); n_cells] }
    }

    /// The same tensors on every cell.
    pub fn uniform(n_cells: usize, dim: usize, eps: &[f64], mu: &[f64]) -> Result<Self> {
        let field = MaterialField { dim, eps: vec![eps.to_vec(); n_cells], mu: vec![mu.to_vec(); n_cells] };
        field.validate()?;
        Ok(field)
    }

    pub fn n_cells(&self) -> usize {
        self.eps.len()
    }

    /// Check shapes, symmetry and positive definiteness.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim;
        for (k, (e, m)) in self.eps.iter().zip(&self.mu).enumerate() {
            for t in [e, m] {
                if t.len() != d * d {
                    return Err(Error::NonSpdMaterial(k));
                }
                let a = as_mat(d, t);
                let scale = t.iter().fold(0.0f64, |s, x| s.max(x.abs()));
                let asym = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).fold(0.0f64, |s, (i, j)| s.max((a[(i, j)] - a[(j, i)]).abs()));
                if asym > 1e-12 * scale || cholesky(a.as_ref()).is_none() {
                    return Err(Error::NonSpdMaterial(k));
                }
            }
        }
        Ok(())
    }

    /// Read a material file: one line per cell with `cell eps(d·d) mu(d·d)`;
    /// blank lines and lines starting with `#` are skipped, missing cells
    /// keep identity tensors.
    pub fn load(path: &Path, mesh: &Mesh) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, mesh)
    }

    pub fn parse(text: &str, mesh: &Mesh) -> Result<Self> {
        let d = mesh.dim();
        let mut field = Self::identity(mesh.n_cells(), d);
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |msg: String| Error::Parse { line: i + 1, msg };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 1 + 2 * d * d {
                return Err(parse_err(format!("expected {} fields, found {}", 1 + 2 * d * d, tokens.len())));
            }
            let cell: usize = tokens[0].parse().map_err(|_| parse_err(format!("bad cell id `{}`", tokens[0])))?;
            if cell >= mesh.n_cells() {
                return Err(parse_err(format!("cell {cell} does not exist")));
            }
            let values = tokens[1..]
                .iter()
                .map(|t| t.parse::<f64>().map_err(|_| parse_err(format!("bad number `{t}`"))))
                .collect::<Result<Vec<f64>>>()?;
            field.eps[cell] = values[..d * d].to_vec();
            field.mu[cell] = values[d * d..].to_vec();
        }
        field.validate()?;
        Ok(field)
    }

    /// Component weight for ℓ-forms in the mass term on cell k.
    fn mass_weight(&self, k: usize, l: usize) -> Mat<f64> {
        let d = self.dim;
        if l == 1 {
            as_mat(d, &self.eps[k])
        } else {
            Mat::identity(n_components(d, l), n_components(d, l))
        }
    }

    /// Component weight for (ℓ+1)-forms in the stiffness term on cell k.
    fn stiffness_weight(&self, k: usize, l: usize) -> Result<Mat<f64>> {
        let d = self.dim;
        let nc = n_components(d, l + 1);
        if l != 1 {
            return Ok(Mat::identity(nc, nc));
        }
        let mu = as_mat(d, &self.mu[k]);
        match d {
            2 => {
                let det = mu[(0, 0)] * mu[(1, 1)] - mu[(0, 1)] * mu[(1, 0)];
                Ok(Mat::from_fn(1, 1, |_, _| 1.0 / det.sqrt()))
            }
            3 => {
                // Components (01, 02, 12) against the proxy (c1, c2, c3) =
                // (u12, −u02, u01).
                let p = Mat::from_fn(3, 3, |i, j| match (i, j) {
                    (0, 2) => 1.0,
                    (1, 1) => -1.0,
                    (2, 0) => 1.0,
                    _ => 0.0,
                });
                let (vals, vecs) = sym_eigen(mu.as_ref())?;
                let inv = Mat::<f64>::from_fn(3, 3, |i, j| (0..3).map(|r| vecs[(i, r)] * vecs[(j, r)] / vals[r]).sum::<f64>());
                Ok(p.transpose() * inv * &p)
            }
            _ => Ok(Mat::identity(nc, nc)),
        }
    }
}

/// Stiffness ⟨du_i, du_j⟩ and mass ⟨u_i, u_j⟩ on a conforming space.
#[derive(Clone, Debug)]
pub struct OperatorPair {
    pub stiffness: Mat<f64>,
    pub mass: Mat<f64>,
}

impl OperatorPair {
    pub fn dim(&self) -> usize {
        self.mass.nrows()
    }
}

/// Σ_q values_qᵀ W values_q over a weighted rule, values laid out per point.
fn weighted_gram(values: MatRef<'_, f64>, weights: &[f64], w: MatRef<'_, f64>) -> Mat<f64> {
    let nc = w.nrows();
    let n = values.ncols();
    let mut g = Mat::<f64>::zeros(n, n);
    for (q, wq) in weights.iter().enumerate() {
        let block = values.subrows(q * nc, nc);
        let wb = w * block;
        g += *wq * (block.transpose() * wb);
    }
    g
}

/// Broken cell matrices congruence-transformed by the embedding.
fn congruence(space: &ConformingSpace, blocks: &[Mat<f64>]) -> Mat<f64> {
    let e = space.embedding();
    let mut y = Mat::<f64>::zeros(e.nrows(), e.ncols());
    for (k, b) in blocks.iter().enumerate() {
        let r = space.cell_range(k);
        let prod = b * e.subrows(r.start, r.len());
        y.subrows_mut(r.start, r.len()).copy_from(&prod);
    }
    symmetrize(&(e.transpose() * y))
}

/// Cell mass and stiffness matrices in the local orthonormal bases.
pub fn cell_matrices(space: &ConformingSpace, materials: &MaterialField) -> Result<(Vec<Mat<f64>>, Vec<Mat<f64>>)> {
    let spec = space.spec();
    if materials.n_cells() != space.mesh().n_cells() || materials.dim != spec.dim {
        return Err(Error::DimensionMismatch(format!(
            "materials for {} cells in dimension {} on a mesh of {} cells",
            materials.n_cells(),
            materials.dim,
            space.mesh().n_cells()
        )));
    }
    materials.validate()?;
    let l = spec.form_degree;
    let mut mass = Vec::new();
    let mut stiff = Vec::new();
    for (k, basis) in space.local_bases().iter().enumerate() {
        let rule = crate::quadrature::QuadRule::reference(spec.cell_kind(), spec.dim, 2 * spec.max_poly_degree());
        let weights: Vec<f64> = rule.weights.iter().map(|w| w * basis.jacobian()).collect();
        mass.push(weighted_gram(basis.eval(&rule.points).as_ref(), &weights, materials.mass_weight(k, l).as_ref()));
        stiff.push(match basis.eval_d(&rule.points) {
            Some(v) => weighted_gram(v.as_ref(), &weights, materials.stiffness_weight(k, l)?.as_ref()),
            None => Mat::zeros(basis.dim(), basis.dim()),
        });
    }
    Ok((mass, stiff))
}

/// Assemble the operator pair; ε weights the mass and μ⁻¹ the stiffness for
/// 1-forms, all other form degrees use identity weights.
pub fn assemble(space: &ConformingSpace, materials: &MaterialField) -> Result<OperatorPair> {
    let (mass, stiff) = cell_matrices(space, materials)?;
    Ok(OperatorPair { stiffness: congruence(space, &stiff), mass: congruence(space, &mass) })
}

/// Assemble with identity materials.
pub fn assemble_default(space: &ConformingSpace) -> Result<OperatorPair> {
    assemble(space, &MaterialField::identity(space.mesh().n_cells(), space.mesh().dim()))
}
