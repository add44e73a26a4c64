//! Coefficient traits shared by every exact algebra in the crate.
//!
//! The ring engine, the Laurent polynomials and the genus engine are written
//! against [`Coefficient`] so that the same code runs over plain rationals and
//! over `Q[y, y^-1]` or `Q[y, y^-1, (1+y)^-1]`. Only exact scalar types
//! implement [`Scalar`].

use std::fmt;
use std::ops::{Div, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A commutative `Q`-algebra with exact equality.
pub trait Coefficient:
    Clone
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Neg<Output = Self>
    + Sub<Output = Self>
    + Send
    + Sync
    + 'static
{
    type Scalar: Scalar;

    fn from_scalar(s: Self::Scalar) -> Self;

    /// Action of the scalar field.
    fn scale(&self, s: &Self::Scalar) -> Self;

    /// Multiplicative inverse, if this element is a unit.
    fn inverse(&self) -> Option<Self>;

    fn from_i64(n: i64) -> Self {
        Self::from_scalar(Self::Scalar::from_ratio(n, 1))
    }
}

/// An exact field of characteristic zero.
pub trait Scalar:
    Coefficient<Scalar = Self> + Div<Output = Self> + PartialOrd + fmt::Display + FromStr
{
    fn from_ratio(numer: i64, denom: i64) -> Self;

    fn from_bigrational(r: &BigRational) -> Self;

    fn to_bigrational(&self) -> BigRational;
}

impl Coefficient for BigRational {
    type Scalar = BigRational;

    fn from_scalar(s: Self) -> Self {
        s
    }

    fn scale(&self, s: &Self) -> Self {
        self * s
    }

    fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }
}

impl Scalar for BigRational {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        BigRational::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn from_bigrational(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_bigrational(&self) -> BigRational {
        self.clone()
    }
}

impl Coefficient for Rational64 {
    type Scalar = Rational64;

    fn from_scalar(s: Self) -> Self {
        s
    }

    fn scale(&self, s: &Self) -> Self {
        self * s
    }

    fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }
}

impl Scalar for Rational64 {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        Rational64::new(numer, denom)
    }

    /// Panics when the value does not fit in 64-bit numerator/denominator.
    fn from_bigrational(r: &BigRational) -> Self {
        let n = r.numer().to_i64().expect("numerator overflows i64");
        let d = r.denom().to_i64().expect("denominator overflows i64");
        Rational64::new(n, d)
    }

    fn to_bigrational(&self) -> BigRational {
        BigRational::new(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
    }
}

/// Parse an exact rational literal `"p/q"`, `"p"` or `"-p/q"`.
pub fn parse_rational<S: Scalar>(text: &str) -> Option<S> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(S::from_bigrational(&BigRational::new(n, d)))
        }
        None => {
            let n: BigInt = text.parse().ok()?;
            Some(S::from_bigrational(&BigRational::from_integer(n)))
        }
    }
}

/// Render a rational as `p/q` (or `p` for integers).
pub fn render_rational<S: Scalar>(s: &S) -> String {
    let r = s.to_bigrational();
    if r.is_integer() {
        r.numer().to_string()
    } else if r.is_negative() {
        format!("-{}/{}", r.numer().abs(), r.denom())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
