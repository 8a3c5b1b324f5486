//! Differential forms with polynomial coefficients in up to three variables.

mod affine;
mod algebra;
mod batch;
mod integrate;
mod modal;
mod poincare;
mod polynomial;
mod random;

use std::collections::BTreeMap;
use std::fmt;

pub use affine::{det as determinant, pullback, pullback_rect, AffineMap};
pub use algebra::{exterior_derivative, interior_product, koszul, wedge};
pub use batch::{FormBatch, Point};
pub use integrate::{l2_inner, CellGeometry};
pub use modal::ModalBasis;
pub use poincare::{
    check_homotopy, poincare_point, poincare_regularized, BumpWeight, Lifting,
};
pub use polynomial::Polynomial;
pub use random::random_form;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Maximum ambient dimension.
pub const MAX_DIM: usize = 3;

/// Exponent multi-index of a monomial; unused axes stay zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub [u8; MAX_DIM]);

impl Monomial {
    pub const ONE: Monomial = Monomial([0; MAX_DIM]);

    pub fn new(exps: &[u8]) -> Self {
        let mut e = [0u8; MAX_DIM];
        e[..exps.len()].copy_from_slice(exps);
        Monomial(e)
    }

    pub fn axis(i: usize) -> Self {
        let mut e = [0u8; MAX_DIM];
        e[i] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(other.0.iter()) {
            *a += *b;
        }
        Monomial(e)
    }

    /// Evaluate at a point.
    pub fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let mut acc = S::one();
        for (i, &e) in self.0.iter().enumerate() {
            if e > 0 {
                acc = acc * crate::scalar::powi(&x[i], e as u32);
            }
        }
        acc
    }

    /// All monomials in `dim` variables of total degree at most `max_degree`,
    /// graded then lexicographic.
    pub fn all_up_to(dim: usize, max_degree: usize) -> Vec<Monomial> {
        let mut out = Vec::new();
        for deg in 0..=max_degree {
            Self::of_degree(dim, deg, &mut out);
        }
        out
    }

    /// Monomials of exact total degree `deg`, appended to `out`.
    pub fn of_degree(dim: usize, deg: usize, out: &mut Vec<Monomial>) {
        fn rec(dim: usize, axis: usize, left: usize, cur: &mut [u8; MAX_DIM], out: &mut Vec<Monomial>) {
            if axis + 1 == dim {
                cur[axis] = left as u8;
                out.push(Monomial(*cur));
                cur[axis] = 0;
                return;
            }
            for e in (0..=left).rev() {
                cur[axis] = e as u8;
                rec(dim, axis + 1, left - e, cur, out);
            }
            cur[axis] = 0;
        }
        if dim == 0 {
            if deg == 0 {
                out.push(Monomial::ONE);
            }
            return;
        }
        rec(dim, 0, deg, &mut [0; MAX_DIM], out);
    }
}

/// Strictly increasing index tuple stored as a bit mask over axes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FormIndex(pub u8);

impl FormIndex {
    pub const EMPTY: FormIndex = FormIndex(0);

    pub fn from_axes(axes: &[usize]) -> Self {
        FormIndex(axes.iter().fold(0u8, |m, &i| m | (1 << i)))
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn contains(&self, axis: usize) -> bool {
        self.0 & (1 << axis) != 0
    }

    pub fn axes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..MAX_DIM).filter(move |&i| self.contains(i))
    }

    pub fn with(&self, axis: usize) -> Self {
        FormIndex(self.0 | (1 << axis))
    }

    pub fn without(&self, axis: usize) -> Self {
        FormIndex(self.0 & !(1 << axis))
    }

    /// Number of indices strictly below `axis`.
    pub fn count_below(&self, axis: usize) -> usize {
        (self.0 & ((1u8 << axis) - 1)).count_ones() as usize
    }

    /// All index sets of size `degree` in dimension `dim`, in lexicographic order.
    pub fn all(dim: usize, degree: usize) -> Vec<FormIndex> {
        (0u8..(1u8 << dim))
            .filter(|m| m.count_ones() as usize == degree)
            .map(FormIndex)
            .collect()
    }
}

/// Number of components of an ℓ-form in dimension d.
pub fn n_components(dim: usize, degree: usize) -> usize {
    crate::scalar::binomial(dim, degree) as usize
}

const AXIS_NAMES: [&str; MAX_DIM] = ["x", "y", "z"];

/// A differential form of fixed degree with polynomial coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyForm<S> {
    dim: usize,
    degree: usize,
    terms: BTreeMap<(FormIndex, Monomial), S>,
}

impl<S: Scalar> PolyForm<S> {
    /// The zero ℓ-form; panics on an invalid (dim, degree) pair.
    pub fn zero(dim: usize, degree: usize) -> Self {
        assert!(dim <= MAX_DIM && degree <= dim, "invalid form type ({dim}, {degree})");
        PolyForm { dim, degree, terms: BTreeMap::new() }
    }

    pub fn try_zero(dim: usize, degree: usize) -> Result<Self> {
        if dim > MAX_DIM || degree > dim {
            return Err(Error::DegreeOutOfRange { dim, degree });
        }
        Ok(Self::zero(dim, degree))
    }

    /// Build from `(axes, exponents, coefficient)` triples; axes may be unsorted,
    /// repeated axes give zero.
    pub fn from_terms<'a, I>(dim: usize, degree: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a [usize], &'a [u8], S)>,
    {
        let mut out = Self::try_zero(dim, degree)?;
        for (axes, exps, c) in terms {
            if axes.len() != degree || axes.iter().any(|&a| a >= dim) || exps.len() > dim {
                return Err(Error::DimensionMismatch(format!(
                    "term {axes:?} x^{exps:?} does not fit a {degree}-form in dimension {dim}"
                )));
            }
            out.add_unsorted(axes, Monomial::new(exps), c);
        }
        Ok(out)
    }

    /// Constant 0-form.
    pub fn constant(dim: usize, c: S) -> Self {
        let mut out = Self::zero(dim, 0);
        out.add_term(FormIndex::EMPTY, Monomial::ONE, c);
        out
    }

    /// The coordinate function x_i as a 0-form.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut out = Self::zero(dim, 0);
        out.add_term(FormIndex::EMPTY, Monomial::axis(i), S::one());
        out
    }

    /// dx_{i1} ∧ … ∧ dx_{ik} for possibly unsorted axes.
    pub fn dx(dim: usize, axes: &[usize]) -> Self {
        let mut out = Self::zero(dim, axes.len());
        out.add_unsorted(axes, Monomial::ONE, S::one());
        out
    }

    /// Single term c·x^α dx_I.
    pub fn monomial(dim: usize, index: FormIndex, mono: Monomial, c: S) -> Self {
        let mut out = Self::zero(dim, index.len());
        out.add_term(index, mono, c);
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (FormIndex, Monomial, &S)> {
        self.terms.iter().map(|(&(i, m), c)| (i, m, c))
    }

    pub fn coefficient(&self, index: FormIndex, mono: Monomial) -> S {
        self.terms.get(&(index, mono)).cloned().unwrap_or_else(S::zero)
    }

    /// Largest total degree among coefficient monomials (0 for the zero form).
    pub fn poly_degree(&self) -> usize {
        self.terms.keys().map(|(_, m)| m.degree()).max().unwrap_or(0)
    }

    /// Largest exponent of any single variable.
    pub fn max_exponent(&self) -> usize {
        self.terms
            .keys()
            .flat_map(|(_, m)| m.0.iter().map(|&e| e as usize))
            .max()
            .unwrap_or(0)
    }

    /// Accumulate c·x^α dx_I with I already increasing.
    pub fn add_term(&mut self, index: FormIndex, mono: Monomial, c: S) {
        debug_assert_eq!(index.len(), self.degree);
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry((index, mono)) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_negligible() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    /// Accumulate with an unsorted index tuple, applying the permutation sign.
    pub fn add_unsorted(&mut self, axes: &[usize], mono: Monomial, c: S) {
        let mut inv = 0;
        for i in 0..axes.len() {
            for j in (i + 1)..axes.len() {
                if axes[i] == axes[j] {
                    return;
                }
                if axes[i] > axes[j] {
                    inv += 1;
                }
            }
        }
        let c = if inv % 2 == 1 { -c } else { c };
        self.add_term(FormIndex::from_axes(axes), mono, c);
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero(self.dim, self.degree);
        if c.is_zero() {
            return out;
        }
        for (k, v) in &self.terms {
            let p = v.clone() * c.clone();
            if !p.is_negligible() {
                out.terms.insert(*k, p);
            }
        }
        out
    }

    /// self += c·other.
    pub fn axpy(&mut self, c: &S, other: &Self) {
        assert_eq!((self.dim, self.degree), (other.dim, other.degree));
        for (&(i, m), v) in &other.terms {
            self.add_term(i, m, v.clone() * c.clone());
        }
    }

    /// Multiply every coefficient by the scalar polynomial `p`.
    pub fn mul_polynomial(&self, p: &Polynomial<S>) -> Self {
        let mut out = Self::zero(self.dim, self.degree);
        for (&(i, m), c) in &self.terms {
            for (pm, pc) in p.terms() {
                out.add_term(i, m.mul(pm), c.clone() * pc.clone());
            }
        }
        out
    }

    /// Coefficient polynomial of dx_I.
    pub fn component(&self, index: FormIndex) -> Polynomial<S> {
        let mut p = Polynomial::zero();
        for (&(i, m), c) in &self.terms {
            if i == index {
                p.add_term(m, c.clone());
            }
        }
        p
    }

    /// Component values at `x`, in the order of [`FormIndex::all`].
    pub fn eval(&self, x: &[S]) -> Vec<S> {
        let indices = FormIndex::all(self.dim, self.degree);
        let mut out = vec![S::zero(); indices.len()];
        for (&(i, m), c) in &self.terms {
            let pos = indices.iter().position(|&j| j == i).expect("valid index");
            out[pos] = out[pos].clone() + c.clone() * m.eval(x);
        }
        out
    }

    /// Convert coefficients to another scalar field.
    pub fn convert<T: Scalar>(&self) -> PolyForm<T> {
        let mut out = PolyForm::zero(self.dim, self.degree);
        for (&(i, m), c) in &self.terms {
            out.add_term(i, m, T::from_f64(c.to_f64()));
        }
        out
    }

    /// Largest coefficient magnitude.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }
}

impl PolyForm<crate::scalar::Rational> {
    /// Exact conversion to doubles (rounded per coefficient).
    pub fn to_f64(&self) -> PolyForm<f64> {
        self.convert()
    }
}

impl<S: Scalar> std::ops::Add for &PolyForm<S> {
    type Output = PolyForm<S>;
    fn add(self, rhs: &PolyForm<S>) -> PolyForm<S> {
        let mut out = self.clone();
        out.axpy(&S::one(), rhs);
        out
    }
}

impl<S: Scalar> std::ops::Sub for &PolyForm<S> {
    type Output = PolyForm<S>;
    fn sub(self, rhs: &PolyForm<S>) -> PolyForm<S> {
        let mut out = self.clone();
        out.axpy(&(-S::one()), rhs);
        out
    }
}

impl<S: Scalar> std::ops::Neg for &PolyForm<S> {
    type Output = PolyForm<S>;
    fn neg(self) -> PolyForm<S> {
        self.scale(&(-S::one()))
    }
}

impl<S: Scalar> fmt::Display for PolyForm<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (&(i, m), c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for (axis, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*{}", AXIS_NAMES[axis])?,
                    _ => write!(f, "*{}^{e}", AXIS_NAMES[axis])?,
                }
            }
            if !i.is_empty() {
                let names: Vec<String> = i.axes().map(|a| format!("d{}", AXIS_NAMES[a])).collect();
                write!(f, " {}", names.join("^"))?;
            }
        }
        Ok(())
    }
}
