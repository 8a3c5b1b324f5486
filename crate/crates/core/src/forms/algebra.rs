use super::{FormIndex, Monomial, PolyForm};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Exterior product u ∧ v.
pub fn wedge<S: Scalar>(u: &PolyForm<S>, v: &PolyForm<S>) -> Result<PolyForm<S>> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch(format!(
            "wedge of forms in dimensions {} and {}",
            u.dim(),
            v.dim()
        )));
    }
    let degree = u.degree() + v.degree();
    if degree > u.dim() {
        return Err(Error::DegreeOutOfRange { dim: u.dim(), degree });
    }
    let mut out = PolyForm::zero(u.dim(), degree);
    for (i, mi, ci) in u.terms() {
        for (j, mj, cj) in v.terms() {
            if i.0 & j.0 != 0 {
                continue;
            }
            // Sign of the shuffle that sorts I followed by J.
            let inversions: usize = j.axes().map(|b| i.axes().filter(|&a| a > b).count()).sum();
            let c = ci.clone() * cj.clone();
            let c = if inversions % 2 == 1 { -c } else { c };
            out.add_term(FormIndex(i.0 | j.0), mi.mul(&mj), c);
        }
    }
    Ok(out)
}

/// Exterior derivative du.
pub fn exterior_derivative<S: Scalar>(u: &PolyForm<S>) -> Result<PolyForm<S>> {
    if u.degree() >= u.dim() {
        return Err(Error::DegreeOutOfRange { dim: u.dim(), degree: u.degree() + 1 });
    }
    let mut out = PolyForm::zero(u.dim(), u.degree() + 1);
    for (i, m, c) in u.terms() {
        for k in 0..u.dim() {
            let e = m.0[k];
            if e == 0 || i.contains(k) {
                continue;
            }
            let mut mm = m;
            mm.0[k] -= 1;
            let c = c.clone() * S::from_i64(e as i64);
            let c = if i.count_below(k) % 2 == 1 { -c } else { c };
            out.add_term(i.with(k), mm, c);
        }
    }
    Ok(out)
}

/// Contraction (x − a) ⌟ u.
pub fn interior_product<S: Scalar>(a: &[S], u: &PolyForm<S>) -> Result<PolyForm<S>> {
    if u.degree() == 0 {
        return Err(Error::DegreeOutOfRange { dim: u.dim(), degree: 0 });
    }
    if a.len() != u.dim() {
        return Err(Error::DimensionMismatch(format!(
            "point of length {} for a form in dimension {}",
            a.len(),
            u.dim()
        )));
    }
    let mut out = PolyForm::zero(u.dim(), u.degree() - 1);
    for (i, m, c) in u.terms() {
        for (r, axis) in i.axes().enumerate() {
            let c = if r % 2 == 1 { -c.clone() } else { c.clone() };
            let rest = i.without(axis);
            out.add_term(rest, m.mul(&Monomial::axis(axis)), c.clone());
            if !a[axis].is_zero() {
                out.add_term(rest, m, -(c * a[axis].clone()));
            }
        }
    }
    Ok(out)
}

/// Koszul operator x ⌟ u.
pub fn koszul<S: Scalar>(u: &PolyForm<S>) -> Result<PolyForm<S>> {
    interior_product(&vec![S::zero(); u.dim()], u)
}
