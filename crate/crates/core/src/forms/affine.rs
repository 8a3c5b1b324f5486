use std::collections::HashMap;

use super::{FormIndex, Monomial, PolyForm, Polynomial};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// x ↦ A x + b on ℝ^d with invertible A.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap<S> {
    matrix: Vec<Vec<S>>,
    offset: Vec<S>,
}

/// Determinant of a small square matrix by cofactor expansion.
pub fn det<S: Scalar>(m: &[Vec<S>]) -> S {
    match m.len() {
        0 => S::one(),
        1 => m[0][0].clone(),
        2 => m[0][0].clone() * m[1][1].clone() - m[0][1].clone() * m[1][0].clone(),
        n => {
            let mut acc = S::zero();
            for j in 0..n {
                let minor: Vec<Vec<S>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, v)| v.clone()).collect())
                    .collect();
                let t = m[0][j].clone() * det(&minor);
                acc = if j % 2 == 0 { acc + t } else { acc - t };
            }
            acc
        }
    }
}

fn singular<S: Scalar>(m: &[Vec<S>]) -> bool {
    let dt = det(m);
    if S::EXACT {
        return dt.is_zero();
    }
    let scale = m.iter().flatten().map(|v| v.to_f64().abs()).fold(0.0, f64::max);
    dt.to_f64().abs() <= 1e-14 * scale.powi(m.len() as i32).max(f64::MIN_POSITIVE)
}

impl<S: Scalar> AffineMap<S> {
    pub fn new(matrix: Vec<Vec<S>>, offset: Vec<S>) -> Result<Self> {
        let d = offset.len();
        if matrix.len() != d || matrix.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch(format!("affine map matrix is not {d}x{d}")));
        }
        if singular(&matrix) {
            return Err(Error::SingularMap);
        }
        Ok(AffineMap { matrix, offset })
    }

    pub fn identity(dim: usize) -> Self {
        let matrix = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { S::one() } else { S::zero() }).collect())
            .collect();
        AffineMap { matrix, offset: vec![S::zero(); dim] }
    }

    pub fn translation(b: Vec<S>) -> Self {
        let mut m = Self::identity(b.len());
        m.offset = b;
        m
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn matrix(&self) -> &[Vec<S>] {
        &self.matrix
    }

    pub fn offset(&self) -> &[S] {
        &self.offset
    }

    pub fn det(&self) -> S {
        det(&self.matrix)
    }

    pub fn apply(&self, x: &[S]) -> Vec<S> {
        self.matrix
            .iter()
            .zip(&self.offset)
            .map(|(row, b)| row.iter().zip(x).fold(b.clone(), |acc, (a, xi)| acc + a.clone() * xi.clone()))
            .collect()
    }

    /// self ∘ other.
    pub fn compose(&self, other: &Self) -> Self {
        let d = self.dim();
        let matrix = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| (0..d).fold(S::zero(), |acc, k| acc + self.matrix[i][k].clone() * other.matrix[k][j].clone()))
                    .collect()
            })
            .collect();
        AffineMap { matrix, offset: self.apply(&other.offset) }
    }

    pub fn inverse(&self) -> Self {
        let d = self.dim();
        let dt = self.det();
        let cof = |i: usize, j: usize| -> S {
            let minor: Vec<Vec<S>> = (0..d)
                .filter(|&r| r != i)
                .map(|r| (0..d).filter(|&c| c != j).map(|c| self.matrix[r][c].clone()).collect())
                .collect();
            let m = det(&minor);
            if (i + j) % 2 == 1 { -m } else { m }
        };
        let inv: Vec<Vec<S>> = (0..d).map(|i| (0..d).map(|j| cof(j, i) / dt.clone()).collect()).collect();
        let offset = inv
            .iter()
            .map(|row| -row.iter().zip(&self.offset).fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone()))
            .collect();
        AffineMap { matrix: inv, offset }
    }
}

/// Pullback φ*u for an invertible affine map.
pub fn pullback<S: Scalar>(phi: &AffineMap<S>, u: &PolyForm<S>) -> Result<PolyForm<S>> {
    if phi.dim() != u.dim() {
        return Err(Error::DimensionMismatch(format!(
            "map on R^{} applied to a form on R^{}",
            phi.dim(),
            u.dim()
        )));
    }
    Ok(pullback_rect(u, &phi.matrix, &phi.offset))
}

/// Pullback of a form on ℝ^n under s ↦ A s + b with A of shape n × m;
/// the result lives on ℝ^m.
pub fn pullback_rect<S: Scalar>(u: &PolyForm<S>, matrix: &[Vec<S>], offset: &[S]) -> PolyForm<S> {
    let n = u.dim();
    assert_eq!(matrix.len(), n);
    let m = matrix.first().map_or(0, |r| r.len());
    if u.degree() > m {
        // No nonzero ℓ-forms exist on ℝ^m; the zero m-form stands in.
        return PolyForm::zero(m, m);
    }
    let mut out = PolyForm::zero(m, u.degree());
    let lin: Vec<Polynomial<S>> = (0..n).map(|i| Polynomial::affine(offset[i].clone(), &matrix[i])).collect();
    let mut powers: Vec<Vec<Polynomial<S>>> = lin.iter().map(|l| vec![Polynomial::constant(S::one()), l.clone()]).collect();
    let max_e = u.max_exponent();
    for (i, p) in powers.iter_mut().enumerate() {
        while p.len() <= max_e {
            let next = p.last().unwrap().mul(&lin[i]);
            p.push(next);
        }
    }
    let mut mono_cache: HashMap<Monomial, Polynomial<S>> = HashMap::new();
    let mut basis_cache: HashMap<FormIndex, PolyForm<S>> = HashMap::new();
    for (idx, mono, c) in u.terms() {
        let poly = mono_cache
            .entry(mono)
            .or_insert_with(|| {
                (0..n).fold(Polynomial::constant(S::one()), |acc, i| acc.mul(&powers[i][mono.0[i] as usize]))
            })
            .clone();
        let basis = basis_cache.entry(idx).or_insert_with(|| {
            let mut acc = PolyForm::constant(m, S::one());
            for axis in idx.axes() {
                let mut one = PolyForm::zero(m, 1);
                for (j, a) in matrix[axis].iter().enumerate() {
                    one.add_term(FormIndex::from_axes(&[j]), Monomial::ONE, a.clone());
                }
                acc = super::wedge(&acc, &one).expect("degree fits");
            }
            acc
        });
        out.axpy(c, &basis.mul_polynomial(&poly));
    }
    out
}
