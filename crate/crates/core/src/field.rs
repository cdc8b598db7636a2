//! Scalar abstractions: exact coefficient fields for q-series and floating
//! point types for numeric evaluation.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// An exact field usable as a q-series coefficient domain.
pub trait Field:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn from_rational(r: &Rational) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(n)))
    }

    fn add_ref(&self, rhs: &Self) -> Self;
    fn sub_ref(&self, rhs: &Self) -> Self;
    fn mul_ref(&self, rhs: &Self) -> Self;

    /// Multiplicative inverse, `None` for zero.
    fn inv(&self) -> Option<Self>;

    fn scale(&self, r: &Rational) -> Self {
        self.mul_ref(&Self::from_rational(r))
    }

    /// Sum of pairwise products; the inner kernel of series multiplication.
    fn dot<'a, I>(pairs: I) -> Self
    where
        I: Iterator<Item = (&'a Self, &'a Self)>,
        Self: 'a,
    {
        let mut acc = Self::zero();
        for (a, b) in pairs {
            if !a.is_zero() && !b.is_zero() {
                acc = acc.add_ref(&a.mul_ref(b));
            }
        }
        acc
    }

    fn checked_div(&self, rhs: &Self) -> Result<Self> {
        rhs.inv()
            .map(|r| self.mul_ref(&r))
            .ok_or(Error::DivisionByZero)
    }
}

impl Field for Rational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn add_ref(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn sub_ref(&self, rhs: &Self) -> Self {
        self - rhs
    }

    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn inv(&self) -> Option<Self> {
        (!self.is_zero()).then(|| self.recip())
    }
}

/// Floating point scalars accepted by the numeric evaluation layer.
pub trait Real: Float + FloatConst + Debug + Send + Sync + 'static {}

impl<T: Float + FloatConst + Debug + Send + Sync + 'static> Real for T {}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn is_integer(r: &Rational) -> bool {
    r.denom().is_one()
}

/// Canonical `"p/q"` text form; integers keep the `/1`.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Human-facing form: integers print without a denominator.
pub fn display_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("bad rational `{s}`"));
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => {
            let p: BigInt = s.parse().map_err(|_| bad())?;
            Ok(Rational::from_integer(p))
        }
    }
}

pub(crate) fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_text_forms() {
        let r = parse_rational("-24/1").unwrap();
        assert_eq!(format_rational(&r), "-24/1");
        assert_eq!(display_rational(&r), "-24");
        assert_eq!(parse_rational("6/8").unwrap(), rat(3, 4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
