use faer::Mat;
use serde::{Deserialize, Serialize};

use super::OperatorPair;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, solve_lower, solve_lower_transpose, sym_eigen, symmetrize};

/// Largest N handled by the dense eigensolver.
pub const DENSE_LIMIT: usize = 20_000;

/// Relative zero threshold: eigenvalues below τ = rel·max(1, λ_max) count
/// as kernel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroThreshold {
    pub rel: f64,
}

impl Default for ZeroThreshold {
    fn default() -> Self {
        ZeroThreshold { rel: 1e-9 }
    }
}

impl ZeroThreshold {
    pub fn tau(&self, lambda_max: f64) -> f64 {
        self.rel * lambda_max.max(1.0)
    }
}

/// Discrete spectrum of a generalized symmetric eigenproblem S x = λ M x.
#[derive(Clone, Debug, Serialize)]
pub struct Spectrum {
    /// All eigenvalues in ascending order, kernel values clipped to zero.
    pub eigenvalues: Vec<f64>,
    pub kernel_dim: usize,
    pub tau: f64,
    /// ‖S x − λ M x‖ in the M⁻¹ norm for each pair.
    pub residuals: Vec<f64>,
    /// M-orthonormal eigenvectors as columns.
    #[serde(skip)]
    pub vectors: Mat<f64>,
}

impl Spectrum {
    /// Positive eigenvalues λ¹ ≤ λ² ≤ …
    pub fn positive(&self) -> &[f64] {
        &self.eigenvalues[self.kernel_dim..]
    }

    /// Groups of positive eigenvalues whose consecutive relative gaps stay
    /// below `rel_tol`, as (mean, multiplicity).
    pub fn clusters(&self, rel_tol: f64) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize, f64)> = Vec::new();
        for &v in self.positive() {
            match out.last_mut() {
                Some((sum, n, last)) if (v - *last) <= rel_tol * v => {
                    *sum += v;
                    *n += 1;
                    *last = v;
                }
                _ => out.push((v, 1, v)),
            }
        }
        out.into_iter().map(|(s, n, _)| (s / n as f64, n)).collect()
    }

    /// Basis of the numerical kernel, M-orthonormal.
    pub fn kernel_vectors(&self) -> Mat<f64> {
        self.vectors.subcols(0, self.kernel_dim).to_owned()
    }
}

/// Dense generalized eigensolve by Cholesky reduction of the mass matrix.
pub fn solve_evp(ops: &OperatorPair, policy: ZeroThreshold) -> Result<Spectrum> {
    let n = ops.dim();
    if n > DENSE_LIMIT {
        return Err(Error::SizeGuard { n, limit: DENSE_LIMIT });
    }
    if n == 0 {
        return Ok(Spectrum { eigenvalues: Vec::new(), kernel_dim: 0, tau: policy.tau(0.0), residuals: Vec::new(), vectors: Mat::zeros(0, 0) });
    }
    let l = cholesky(ops.mass.as_ref()).ok_or(Error::MassNotPositiveDefinite)?;
    // C = L⁻¹ S L⁻ᵀ
    let mut c = ops.stiffness.clone();
    solve_lower(l.as_ref(), &mut c);
    let mut ct = c.transpose().to_owned();
    solve_lower(l.as_ref(), &mut ct);
    let c = symmetrize(&ct);
    let (vals, y) = sym_eigen(c.as_ref())?;
    let mut x = y.clone();
    solve_lower_transpose(l.as_ref(), &mut x);
    let lambda_max = vals.last().copied().unwrap_or(0.0).max(0.0);
    let tau = policy.tau(lambda_max);
    let kernel_dim = vals.iter().filter(|&&v| v < tau).count();
    let eigenvalues: Vec<f64> = vals.iter().map(|&v| if v < tau { 0.0 } else { v }).collect();
    // Residuals in the M⁻¹ norm: ‖L⁻¹(S x − λ M x)‖.
    let sx = &ops.stiffness * &x;
    let mx = &ops.mass * &x;
    let mut r = Mat::<f64>::from_fn(n, n, |i, j| sx[(i, j)] - vals[j] * mx[(i, j)]);
    solve_lower(l.as_ref(), &mut r);
    let residuals = (0..n).map(|j| r.col(j).norm_l2()).collect();
    Ok(Spectrum { eigenvalues, kernel_dim, tau, residuals, vectors: x })
}
