use std::collections::HashMap;

use num::BigInt;

use super::{exterior_derivative, FormIndex, Monomial, PolyForm};
use crate::error::{Error, Result};
use crate::scalar::{binomial, factorial, Scalar};

/// Normalized tensor-product bump c·∏ᵢ(1 − ((aᵢ − cᵢ)/hᵢ)²)^k on a box.
#[derive(Clone, Debug, PartialEq)]
pub struct BumpWeight<S> {
    center: Vec<S>,
    half_widths: Vec<S>,
    power: u32,
    normalization: S,
}

/// ∫_{-1}^{1} s^j (1 − s²)^k ds.
fn reference_moment<S: Scalar>(j: usize, k: u32) -> S {
    if j % 2 == 1 {
        return S::zero();
    }
    let mut acc = S::zero();
    for m in 0..=k as usize {
        let c = S::from_i64(binomial(k as usize, m) as i64) * S::from_ratio(2, (j + 2 * m + 1) as i64);
        acc = if m % 2 == 0 { acc + c } else { acc - c };
    }
    acc
}

impl<S: Scalar> BumpWeight<S> {
    pub fn new(center: Vec<S>, half_widths: Vec<S>, power: u32) -> Result<Self> {
        if center.len() != half_widths.len() || center.is_empty() {
            return Err(Error::DimensionMismatch("bump center and half-widths differ in length".into()));
        }
        if power == 0 || half_widths.iter().any(|h| !h.is_positive()) {
            return Err(Error::InvalidArgument("bump needs power ≥ 1 and positive half-widths".into()));
        }
        let mass = half_widths
            .iter()
            .fold(S::one(), |acc, h| acc * h.clone() * reference_moment::<S>(0, power));
        let normalization = S::one() / mass;
        Ok(BumpWeight { center, half_widths, power, normalization })
    }

    /// Accepts an externally supplied normalization constant after checking it.
    pub fn with_normalization(center: Vec<S>, half_widths: Vec<S>, power: u32, normalization: S) -> Result<Self> {
        let w = Self::new(center, half_widths, power)?;
        let ok = if S::EXACT {
            w.normalization == normalization
        } else {
            (w.normalization.to_f64() - normalization.to_f64()).abs() <= 1e-12 * w.normalization.to_f64().abs()
        };
        if !ok {
            return Err(Error::UnnormalizedWeight);
        }
        Ok(w)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[S] {
        &self.center
    }

    pub fn half_widths(&self) -> &[S] {
        &self.half_widths
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    pub fn normalization(&self) -> &S {
        &self.normalization
    }

    /// θ(a); zero outside the box.
    pub fn eval(&self, a: &[S]) -> S {
        let mut acc = self.normalization.clone();
        for i in 0..self.dim() {
            let s = (a[i].clone() - self.center[i].clone()) / self.half_widths[i].clone();
            let t = S::one() - s.clone() * s;
            if !t.is_positive() {
                return S::zero();
            }
            acc = acc * crate::scalar::powi(&t, self.power);
        }
        acc
    }

    /// One-dimensional moments ∫ a^n (1 − ((a−c)/h)²)^k da along `axis`, n ≤ max.
    fn axis_moments(&self, axis: usize, max: usize) -> Vec<S> {
        let c = &self.center[axis];
        let h = &self.half_widths[axis];
        let refm: Vec<S> = (0..=max).map(|j| reference_moment(j, self.power)).collect();
        (0..=max)
            .map(|n| {
                let mut acc = S::zero();
                for j in (0..=n).step_by(2) {
                    acc = acc
                        + S::from_i64(binomial(n, j) as i64)
                            * crate::scalar::powi(c, (n - j) as u32)
                            * crate::scalar::powi(h, j as u32)
                            * refm[j].clone();
                }
                acc * h.clone()
            })
            .collect()
    }

    /// Moment table m_β = ∫ θ(a) a^β da for all |β|_∞ ≤ max.
    fn moments(&self, max: usize) -> impl Fn(&Monomial) -> S + '_ {
        let tables: Vec<Vec<S>> = (0..self.dim()).map(|i| self.axis_moments(i, max)).collect();
        move |b: &Monomial| {
            tables
                .iter()
                .enumerate()
                .fold(self.normalization.clone(), |acc, (i, t)| acc * t[b.0[i] as usize].clone())
        }
    }

    /// (θ, u)₀ = ∫ θ u for a 0-form u.
    pub fn mean(&self, u: &PolyForm<S>) -> S {
        let m = self.moments(u.max_exponent());
        u.terms().fold(S::zero(), |acc, (_, mono, c)| acc + c.clone() * m(&mono))
    }
}

/// Base-point choice for the Poincaré lifting.
#[derive(Clone, Debug)]
pub enum Lifting<S> {
    Point(Vec<S>),
    Regularized(BumpWeight<S>),
}

impl<S: Scalar> Lifting<S> {
    pub fn lift(&self, u: &PolyForm<S>) -> Result<PolyForm<S>> {
        match self {
            Lifting::Point(a) => poincare_point(a, u),
            Lifting::Regularized(w) => poincare_regularized(w, u),
        }
    }

    fn mean(&self, u: &PolyForm<S>) -> S {
        match self {
            Lifting::Point(a) => u.eval(a)[0].clone(),
            Lifting::Regularized(w) => w.mean(u),
        }
    }
}

/// Shared monomial expansion: `moment(β)` replaces the base-point power a^β.
fn lift_with<S: Scalar, F: Fn(&Monomial) -> S>(u: &PolyForm<S>, moment: F) -> Result<PolyForm<S>> {
    if u.degree() == 0 {
        return Err(Error::DegreeOutOfRange { dim: u.dim(), degree: 0 });
    }
    let dim = u.dim();
    let l = u.degree();
    let mut memo: HashMap<Monomial, S> = HashMap::new();
    let mut mom = |b: Monomial| memo.entry(b).or_insert_with(|| moment(&b)).clone();
    let mut out = PolyForm::zero(dim, l - 1);
    for (idx, alpha, c) in u.terms() {
        let q = alpha.degree();
        let axes: Vec<usize> = idx.axes().collect();
        for j in sub_multi_indices(&alpha, dim) {
            let jd = j.degree();
            // Π C(α_i, j_i) · B(ℓ + |j|, q − |j| + 1)
            let mut num = factorial(l + jd - 1) * factorial(q - jd);
            for i in 0..dim {
                num *= BigInt::from(binomial(alpha.0[i] as usize, j.0[i] as usize));
            }
            let coef = c.clone() * S::from_big(&num, &factorial(l + q));
            let mut rest = alpha;
            for i in 0..dim {
                rest.0[i] -= j.0[i];
            }
            for (r, &axis) in axes.iter().enumerate() {
                let signed = if r % 2 == 1 { -coef.clone() } else { coef.clone() };
                let target: FormIndex = idx.without(axis);
                out.add_term(target, j.mul(&Monomial::axis(axis)), signed.clone() * mom(rest));
                out.add_term(target, j, -(signed * mom(rest.mul(&Monomial::axis(axis)))));
            }
        }
    }
    Ok(out)
}

fn sub_multi_indices(alpha: &Monomial, dim: usize) -> Vec<Monomial> {
    let mut out = vec![Monomial::ONE];
    for i in 0..dim {
        let mut next = Vec::with_capacity(out.len() * (alpha.0[i] as usize + 1));
        for m in &out {
            for e in 0..=alpha.0[i] {
                let mut mm = *m;
                mm.0[i] = e;
                next.push(mm);
            }
        }
        out = next;
    }
    out
}

/// R_{ℓ,a} u = (x − a) ⌟ ∫₀¹ t^{ℓ−1} u(a + t(x − a)) dt.
pub fn poincare_point<S: Scalar>(a: &[S], u: &PolyForm<S>) -> Result<PolyForm<S>> {
    if a.len() != u.dim() {
        return Err(Error::DimensionMismatch(format!(
            "base point of length {} for a form in dimension {}",
            a.len(),
            u.dim()
        )));
    }
    lift_with(u, |b| b.eval(a))
}

/// R_ℓ u = ∫ θ(a) R_{ℓ,a} u da.
pub fn poincare_regularized<S: Scalar>(w: &BumpWeight<S>, u: &PolyForm<S>) -> Result<PolyForm<S>> {
    if w.dim() != u.dim() {
        return Err(Error::DimensionMismatch(format!(
            "weight in dimension {} for a form in dimension {}",
            w.dim(),
            u.dim()
        )));
    }
    let m = w.moments(u.max_exponent() + 1);
    lift_with(u, m)
}

/// Residual of the homotopy identity:
/// R du − u + (θ,u) for ℓ = 0, dRu + Rdu − u in between, dRu − u for ℓ = d.
pub fn check_homotopy<S: Scalar>(u: &PolyForm<S>, lifting: &Lifting<S>) -> PolyForm<S> {
    let (dim, l) = (u.dim(), u.degree());
    let du = (l < dim).then(|| exterior_derivative(u).expect("degree below dimension"));
    let rdu = du.map(|du| lifting.lift(&du).expect("lifting of a positive-degree form"));
    let drv = (l > 0).then(|| {
        let r = lifting.lift(u).expect("lifting of a positive-degree form");
        exterior_derivative(&r).expect("degree below dimension")
    });
    let mut res = -u;
    if let Some(a) = rdu {
        res = &res + &a;
    }
    if let Some(b) = drv {
        res = &res + &b;
    }
    if l == 0 {
        res = &res + &PolyForm::constant(dim, lifting.mean(u));
    }
    res
}
