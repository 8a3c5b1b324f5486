use std::collections::BTreeMap;

use super::Monomial;
use crate::scalar::Scalar;

/// Scalar polynomial as a sparse monomial map.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<S> {
    terms: BTreeMap<Monomial, S>,
}

impl<S: Scalar> Polynomial<S> {
    pub fn zero() -> Self {
        Polynomial { terms: BTreeMap::new() }
    }

    pub fn constant(c: S) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::ONE, c);
        p
    }

    /// Affine polynomial c0 + Σ c_j x_j.
    pub fn affine(c0: S, coeffs: &[S]) -> Self {
        let mut p = Self::constant(c0);
        for (j, c) in coeffs.iter().enumerate() {
            p.add_term(Monomial::axis(j), c.clone());
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &S)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, m: Monomial, c: S) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m).or_insert_with(S::zero);
        *e = e.clone() + c;
        if e.is_negligible() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn eval(&self, x: &[S]) -> S {
        self.terms
            .iter()
            .fold(S::zero(), |acc, (m, c)| acc + c.clone() * m.eval(x))
    }

    /// Partial derivative along `axis`.
    pub fn derivative(&self, axis: usize) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let e = m.0[axis];
            if e > 0 {
                let mut mm = *m;
                mm.0[axis] -= 1;
                out.add_term(mm, c.clone() * S::from_i64(e as i64));
            }
        }
        out
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }
}
