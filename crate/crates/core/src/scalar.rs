//! Scalar fields used as polynomial coefficients.

use std::fmt::{Debug, Display};

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

/// Exact rational scalar.
pub type Rational = BigRational;

/// Coefficient field: exact rationals or IEEE doubles.
pub trait Scalar:
    Clone + Debug + Display + PartialEq + Signed + Send + Sync + 'static
{
    /// `true` when arithmetic is exact.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// Exact conversion for rationals (every finite double is rational).
    fn from_f64(v: f64) -> Self;

    fn to_f64(&self) -> f64;

    fn from_big(num: &BigInt, den: &BigInt) -> Self;

    /// Zero test used after arithmetic; exact for rationals.
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).unwrap_or_else(BigRational::zero)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_big(num: &BigInt, den: &BigInt) -> Self {
        BigRational::new(num.clone(), den.clone())
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_big(num: &BigInt, den: &BigInt) -> Self {
        ToPrimitive::to_f64(&BigRational::new(num.clone(), den.clone())).unwrap_or(f64::NAN)
    }
}

/// Integer power by repeated multiplication.
pub fn powi<S: Scalar>(base: &S, exp: u32) -> S {
    let mut acc = S::one();
    for _ in 0..exp {
        acc = acc * base.clone();
    }
    acc
}

/// Binomial coefficient as u64.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// n! as an exact big integer.
pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}
