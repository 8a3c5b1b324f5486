//! Exact rational elimination and dense float helpers.

use std::collections::BTreeMap;

use faer::linalg::triangular_solve::{solve_lower_triangular_in_place, solve_upper_triangular_in_place};
use faer::{Mat, MatRef, Par, Side};
use num::Zero;

use crate::error::{Error, Result};
use crate::forms::determinant;
use crate::mesh::combinations;
use crate::scalar::Rational;

/// Sparse rational vector as (column, value) pairs with increasing columns.
pub type SparseVec = Vec<(usize, Rational)>;

/// Incrementally built row-echelon basis with deterministic pivots (the first
/// nonzero column of each reduced row).
#[derive(Clone, Debug, Default)]
pub struct ExactSpan {
    rows: BTreeMap<usize, SparseVec>,
}

fn axpy_sparse(v: &SparseVec, c: &Rational, row: &SparseVec) -> SparseVec {
    let mut out = Vec::with_capacity(v.len() + row.len());
    let (mut i, mut j) = (0, 0);
    while i < v.len() || j < row.len() {
        let take_v = j >= row.len() || (i < v.len() && v[i].0 < row[j].0);
        let take_r = i >= v.len() || (j < row.len() && row[j].0 < v[i].0);
        if take_v {
            out.push(v[i].clone());
            i += 1;
        } else if take_r {
            out.push((row[j].0, -(c * &row[j].1)));
            j += 1;
        } else {
            let s = &v[i].1 - c * &row[j].1;
            if !s.is_zero() {
                out.push((v[i].0, s));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

impl ExactSpan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Remainder of `v` after elimination against the current rows.
    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        let mut v: SparseVec = v.iter().filter(|(_, c)| !c.is_zero()).cloned().collect();
        for (&p, row) in &self.rows {
            if let Ok(pos) = v.binary_search_by_key(&p, |e| e.0) {
                let c = &v[pos].1 / &row[0].1;
                v = axpy_sparse(&v, &c, row);
            }
        }
        v
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v).is_empty()
    }

    /// Insert `v`; returns whether it enlarged the span.
    pub fn insert(&mut self, v: &SparseVec) -> bool {
        let r = self.reduce(v);
        match r.first() {
            None => false,
            Some(&(p, _)) => {
                self.rows.insert(p, r);
                true
            }
        }
    }
}

/// Indices of a maximal independent subset, scanning in order.
pub fn select_independent(vectors: &[SparseVec]) -> Vec<usize> {
    let mut span = ExactSpan::new();
    (0..vectors.len()).filter(|&i| span.insert(&vectors[i])).collect()
}

pub fn exact_rank(vectors: &[SparseVec]) -> usize {
    select_independent(vectors).len()
}

/// Relative singular-value threshold for numerical rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// SVD of `a` computed on the triangular factor of a QR decomposition.
/// Tall inputs with clustered singular values otherwise lose small singular
/// values in faer's bidiagonal path. Returns (U thin, S, V).
fn reduced_svd(a: MatRef<'_, f64>) -> (Mat<f64>, Vec<f64>, Mat<f64>) {
    if a.nrows() < a.ncols() {
        let (u, s, v) = reduced_svd(a.transpose());
        return (v, s, u);
    }
    let qr = a.qr();
    let q = qr.compute_thin_Q();
    let r = qr.thin_R().to_owned();
    let svd = r.svd().expect("svd converges");
    let s = svd.S().column_vector();
    let s: Vec<f64> = (0..s.nrows()).map(|i| s[i]).collect();
    (q * svd.U(), s, svd.V().to_owned())
}

/// Orthonormal basis of the null space of `a` (n columns), singular values
/// below `rel_tol·σ_max` treated as zero.
pub fn null_space(a: MatRef<'_, f64>, rel_tol: f64) -> Mat<f64> {
    let n = a.ncols();
    if a.nrows() == 0 || n == 0 {
        return Mat::identity(n, n);
    }
    if a.nrows() < n {
        // Pad with zero rows so V is square.
        let mut padded = Mat::<f64>::zeros(n, n);
        padded.subrows_mut(0, a.nrows()).copy_from(a);
        return null_space(padded.as_ref(), rel_tol);
    }
    let (_, s, v) = reduced_svd(a);
    let smax = s.first().copied().unwrap_or(0.0);
    let rank = s.iter().filter(|&&x| x > rel_tol * smax && x > 0.0).count();
    v.subcols(rank, n - rank).to_owned()
}

/// Orthonormal basis of the column space of `a` and the singular values kept.
pub fn range_basis(a: MatRef<'_, f64>, rel_tol: f64, abs_tol: f64) -> (Mat<f64>, Vec<f64>) {
    if a.nrows() == 0 || a.ncols() == 0 {
        return (Mat::zeros(a.nrows(), 0), Vec::new());
    }
    let (u, s, _) = reduced_svd(a);
    let smax = s.first().copied().unwrap_or(0.0);
    let kept: Vec<f64> = s.into_iter().filter(|&v| v > rel_tol * smax && v > abs_tol).collect();
    (u.subcols(0, kept.len()).to_owned(), kept)
}

/// Orthonormal basis of the orthogonal complement of the column space of
/// `a` (m × k), with pivots below `rel_tol·|r_00|` treated as zero.
pub fn orthonormal_complement(a: MatRef<'_, f64>, rel_tol: f64) -> Mat<f64> {
    let m = a.nrows();
    if a.ncols() == 0 || m == 0 {
        return Mat::identity(m, m);
    }
    // Rank from the pivoted R diagonal, which is non-increasing in magnitude.
    let qr = a.col_piv_qr();
    let r = qr.R();
    let n = m.min(a.ncols());
    let rmax = if n > 0 { r[(0, 0)].abs() } else { 0.0 };
    let rank = (0..n).take_while(|&i| r[(i, i)].abs() > rel_tol * rmax && r[(i, i)] != 0.0).count();
    if rank == 0 {
        return Mat::identity(m, m);
    }
    qr.compute_Q().subcols(rank, m - rank).to_owned()
}

/// Singular values in decreasing order.
pub fn singular_values(a: MatRef<'_, f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    reduced_svd(a).1
}

/// Numerical rank with threshold `rel_tol·σ_max`.
pub fn numerical_rank(a: MatRef<'_, f64>, rel_tol: f64) -> usize {
    let s = singular_values(a);
    let smax = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&v| v > rel_tol * smax && v > 0.0).count()
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(a: MatRef<'_, f64>) -> Option<Mat<f64>> {
    let llt = a.llt(Side::Lower).ok()?;
    Some(llt.L().to_owned())
}

/// Solve L X = B in place for lower-triangular L.
pub fn solve_lower(l: MatRef<'_, f64>, b: &mut Mat<f64>) {
    solve_lower_triangular_in_place(l, b.as_mut(), Par::Seq);
}

/// Solve Lᵀ X = B in place for lower-triangular L.
pub fn solve_lower_transpose(l: MatRef<'_, f64>, b: &mut Mat<f64>) {
    solve_upper_triangular_in_place(l.transpose(), b.as_mut(), Par::Seq);
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix.
pub fn sym_eigen(a: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::InvalidArgument(format!("eigensolver failed: {e:?}")))?;
    let s = evd.S().column_vector();
    Ok(((0..s.nrows()).map(|i| s[i]).collect(), evd.U().to_owned()))
}

/// (A + Aᵀ)/2.
pub fn symmetrize(a: &Mat<f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
}

pub fn max_abs(a: MatRef<'_, f64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].abs());
        }
    }
    m
}

pub fn frobenius(a: MatRef<'_, f64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)] * a[(i, j)];
        }
    }
    s.sqrt()
}

/// ℓ-th compound of an n × m matrix: entry (I, J) = det B[I, J] over
/// increasing index sets in lexicographic order.
pub fn compound(b: &[Vec<f64>], l: usize) -> Mat<f64> {
    let n = b.len();
    let m = b.first().map_or(0, |r| r.len());
    let rows = combinations(n, l);
    let cols = combinations(m, l);
    Mat::from_fn(rows.len(), cols.len(), |i, j| {
        let sub: Vec<Vec<f64>> = rows[i].iter().map(|&r| cols[j].iter().map(|&c| b[r][c]).collect()).collect();
        determinant(&sub)
    })
}
