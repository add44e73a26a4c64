//! Laurent polynomials in the genus variable `y` and the localization
//! `Q[y, y^-1, (1+y)^-1]`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::{parse_rational, render_rational, Coefficient, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LaurentError {
    #[error("(1+y) does not divide the polynomial: its value at y = -1 is {value}")]
    NotDivisible { value: String },
    #[error("pole at y = {at}")]
    Pole { at: String },
    #[error("cannot parse Laurent polynomial `{0}`")]
    Parse(String),
}

/// Finite sum of `c_e * y^e` with `e` ranging over the integers.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Laurent<S> {
    terms: BTreeMap<i32, S>,
}

impl<S: Scalar> Laurent<S> {
    pub fn monomial(coeff: S, exp: i32) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exp, coeff);
        }
        Laurent { terms }
    }

    pub fn constant(coeff: S) -> Self {
        Self::monomial(coeff, 0)
    }

    pub fn y() -> Self {
        Self::monomial(S::one(), 1)
    }

    pub fn y_pow(exp: i32) -> Self {
        Self::monomial(S::one(), exp)
    }

    /// The polynomial `1 + y`.
    pub fn one_plus_y() -> Self {
        Self::from_coeffs(0, vec![S::one(), S::one()])
    }

    /// Build from consecutive coefficients starting at exponent `lowest`.
    pub fn from_coeffs(lowest: i32, coeffs: Vec<S>) -> Self {
        let terms = coeffs
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (lowest + i as i32, c))
            .collect();
        Laurent { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (i32, S)>>(terms: I) -> Self {
        let mut out = Laurent::zero();
        for (e, c) in terms {
            out.add_term(e, c);
        }
        out
    }

    pub fn coeff(&self, exp: i32) -> S {
        self.terms.get(&exp).cloned().unwrap_or_else(S::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &S)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn min_exp(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    fn add_term(&mut self, exp: i32, coeff: S) {
        if coeff.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&exp) {
            Some(old) => old + coeff,
            None => coeff,
        };
        if !sum.is_zero() {
            self.terms.insert(exp, sum);
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Substitute `y = y0`. Fails at `y0 = 0` when negative powers are present.
    pub fn eval_at(&self, y0: &S) -> Result<S, LaurentError> {
        if y0.is_zero() && self.min_exp().is_some_and(|e| e < 0) {
            return Err(LaurentError::Pole { at: "0".into() });
        }
        let mut acc = S::zero();
        for (e, c) in &self.terms {
            let p = if *e >= 0 {
                pow_scalar(y0, *e as u32)
            } else {
                pow_scalar(&(S::one() / y0.clone()), e.unsigned_abs())
            };
            acc = acc + c.clone() * p;
        }
        Ok(acc)
    }

    /// The unique `q` with `(1+y) q = self`, or an error when `self(-1) != 0`.
    pub fn divide_by_one_plus_y(&self) -> Result<Self, LaurentError> {
        let (lo, hi) = match (self.min_exp(), self.max_exp()) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return Ok(Self::zero()),
        };
        // synthetic division of y^-lo * self by (y + 1), top coefficient first
        let deg = (hi - lo) as usize;
        let a: Vec<S> = (0..=deg).map(|i| self.coeff(lo + i as i32)).collect();
        let mut q = vec![S::zero(); deg];
        let mut carry = S::zero();
        for k in (1..=deg).rev() {
            carry = a[k].clone() - carry;
            q[k - 1] = carry.clone();
        }
        let remainder = a[0].clone() - carry;
        if !remainder.is_zero() {
            let value = self.eval_at(&-S::one()).expect("y = -1 is never a pole");
            return Err(LaurentError::NotDivisible {
                value: render_rational(&value),
            });
        }
        Ok(Self::from_coeffs(lo, q))
    }

    pub fn is_divisible_by_one_plus_y(&self) -> bool {
        self.eval_at(&-S::one())
            .map(|v| v.is_zero())
            .unwrap_or(false)
    }

    /// Exact textual form, e.g. `-1/2*y^-1 + 3 + 2*y`.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let negative = *c < S::zero();
            let mag = if negative { -c.clone() } else { c.clone() };
            if i == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let unit = mag.is_one();
            match (*e, unit) {
                (0, _) => out.push_str(&render_rational(&mag)),
                (_, true) => out.push_str(&render_y(*e)),
                (_, false) => {
                    out.push_str(&render_rational(&mag));
                    out.push('*');
                    out.push_str(&render_y(*e));
                }
            }
        }
        out
    }
}

fn render_y(e: i32) -> String {
    if e == 1 {
        "y".into()
    } else {
        format!("y^{e}")
    }
}

fn pow_scalar<S: Scalar>(base: &S, n: u32) -> S {
    let mut out = S::one();
    for _ in 0..n {
        out = out * base.clone();
    }
    out
}

impl<S: Scalar> fmt::Display for Laurent<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl<S: Scalar> fmt::Debug for Laurent<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Laurent({})", self.render())
    }
}

impl<S: Scalar> FromStr for Laurent<S> {
    type Err = LaurentError;

    fn from_str(text: &str) -> Result<Self, LaurentError> {
        let err = || LaurentError::Parse(text.to_string());
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(err());
        }
        // split into signed terms; a sign right after '^' belongs to the exponent
        let mut pieces: Vec<String> = Vec::new();
        let mut current = String::new();
        let mut prev: Option<char> = None;
        for ch in compact.chars() {
            if (ch == '+' || ch == '-') && !current.is_empty() && prev != Some('^') {
                pieces.push(std::mem::take(&mut current));
            }
            current.push(ch);
            prev = Some(ch);
        }
        pieces.push(current);

        let mut out = Laurent::zero();
        for piece in pieces {
            let (negative, body) = match piece.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, piece.strip_prefix('+').unwrap_or(&piece)),
            };
            if body.is_empty() {
                return Err(err());
            }
            let (coeff_text, y_text) = match body.find('y') {
                Some(pos) => {
                    let (c, yv) = body.split_at(pos);
                    (c.strip_suffix('*').unwrap_or(c), Some(yv))
                }
                None => (body, None),
            };
            let mut coeff: S = if coeff_text.is_empty() {
                S::one()
            } else {
                parse_rational(coeff_text).ok_or_else(err)?
            };
            if negative {
                coeff = -coeff;
            }
            let exp = match y_text {
                None => 0,
                Some("y") => 1,
                Some(yv) => yv
                    .strip_prefix("y^")
                    .and_then(|e| e.parse::<i32>().ok())
                    .ok_or_else(err)?,
            };
            out.add_term(exp, coeff);
        }
        Ok(out)
    }
}

impl<S: Scalar> Zero for Laurent<S> {
    fn zero() -> Self {
        Laurent {
            terms: BTreeMap::new(),
        }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl<S: Scalar> One for Laurent<S> {
    fn one() -> Self {
        Self::constant(S::one())
    }
}

impl<S: Scalar> Add<&Laurent<S>> for &Laurent<S> {
    type Output = Laurent<S>;

    fn add(self, rhs: &Laurent<S>) -> Laurent<S> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl<S: Scalar> Sub<&Laurent<S>> for &Laurent<S> {
    type Output = Laurent<S>;

    fn sub(self, rhs: &Laurent<S>) -> Laurent<S> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }
}

impl<S: Scalar> Mul<&Laurent<S>> for &Laurent<S> {
    type Output = Laurent<S>;

    fn mul(self, rhs: &Laurent<S>) -> Laurent<S> {
        let mut out = Laurent::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                out.add_term(e1 + e2, c1.clone() * c2.clone());
            }
        }
        out
    }
}

impl<S: Scalar> Neg for &Laurent<S> {
    type Output = Laurent<S>;

    fn neg(self) -> Laurent<S> {
        Laurent {
            terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }
}

macro_rules! forward_owned_ops {
    ($ty:ident) => {
        impl<S: Scalar> Add for $ty<S> {
            type Output = $ty<S>;
            fn add(self, rhs: $ty<S>) -> $ty<S> {
                &self + &rhs
            }
        }
        impl<S: Scalar> Sub for $ty<S> {
            type Output = $ty<S>;
            fn sub(self, rhs: $ty<S>) -> $ty<S> {
                &self - &rhs
            }
        }
        impl<S: Scalar> Mul for $ty<S> {
            type Output = $ty<S>;
            fn mul(self, rhs: $ty<S>) -> $ty<S> {
                &self * &rhs
            }
        }
        impl<S: Scalar> Neg for $ty<S> {
            type Output = $ty<S>;
            fn neg(self) -> $ty<S> {
                -&self
            }
        }
    };
}

forward_owned_ops!(Laurent);
forward_owned_ops!(Localized);

impl<S: Scalar> Coefficient for Laurent<S> {
    type Scalar = S;

    fn from_scalar(s: S) -> Self {
        Self::constant(s)
    }

    fn scale(&self, s: &S) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Laurent {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (*e, c.clone() * s.clone()))
                .collect(),
        }
    }

    /// Only monomials `c * y^e` are units.
    fn inverse(&self) -> Option<Self> {
        if !self.is_monomial() {
            return None;
        }
        let (e, c) = self.terms.iter().next()?;
        Some(Self::monomial(S::one() / c.clone(), -e))
    }
}

/// `numerator / (1+y)^denom_exponent`, kept in canonical form: when the
/// exponent is positive, `(1+y)` does not divide the numerator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Localized<S> {
    numerator: Laurent<S>,
    denom_exponent: u32,
}

impl<S: Scalar> Localized<S> {
    pub fn new(numerator: Laurent<S>, denom_exponent: u32) -> Self {
        let mut out = Localized {
            numerator,
            denom_exponent,
        };
        out.canonicalize();
        out
    }

    pub fn from_laurent(p: Laurent<S>) -> Self {
        Localized {
            numerator: p,
            denom_exponent: 0,
        }
    }

    /// `(1+y)^exp` for any integer exponent.
    pub fn one_plus_y_pow(exp: i32) -> Self {
        if exp >= 0 {
            Self::from_laurent(Laurent::one_plus_y().pow(exp as u32))
        } else {
            Localized {
                numerator: Laurent::one(),
                denom_exponent: exp.unsigned_abs(),
            }
        }
    }

    pub fn numerator(&self) -> &Laurent<S> {
        &self.numerator
    }

    pub fn denom_exponent(&self) -> u32 {
        self.denom_exponent
    }

    fn canonicalize(&mut self) {
        if self.numerator.is_zero() {
            self.denom_exponent = 0;
            return;
        }
        while self.denom_exponent > 0 {
            match self.numerator.divide_by_one_plus_y() {
                Ok(q) => {
                    self.numerator = q;
                    self.denom_exponent -= 1;
                }
                Err(_) => break,
            }
        }
    }

    /// The underlying Laurent polynomial when no `(1+y)` denominator survives.
    pub fn to_laurent(&self) -> Option<Laurent<S>> {
        (self.denom_exponent == 0).then(|| self.numerator.clone())
    }

    pub fn eval_at(&self, y0: &S) -> Result<S, LaurentError> {
        let num = self.numerator.eval_at(y0)?;
        if self.denom_exponent == 0 {
            return Ok(num);
        }
        let base = S::one() + y0.clone();
        if base.is_zero() {
            return Err(LaurentError::Pole {
                at: render_rational(y0),
            });
        }
        Ok(num / pow_scalar(&base, self.denom_exponent))
    }

    fn lift(&self, target_exp: u32) -> Laurent<S> {
        &self.numerator * &Laurent::one_plus_y().pow(target_exp - self.denom_exponent)
    }

    pub fn render(&self) -> String {
        match self.denom_exponent {
            0 => self.numerator.render(),
            1 => format!("({})/(1 + y)", self.numerator.render()),
            e => format!("({})/(1 + y)^{e}", self.numerator.render()),
        }
    }
}

impl<S: Scalar> fmt::Display for Localized<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl<S: Scalar> fmt::Debug for Localized<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Localized({})", self.render())
    }
}

impl<S: Scalar> Zero for Localized<S> {
    fn zero() -> Self {
        Self::from_laurent(Laurent::zero())
    }

    fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }
}

impl<S: Scalar> One for Localized<S> {
    fn one() -> Self {
        Self::from_laurent(Laurent::one())
    }
}

impl<S: Scalar> Add<&Localized<S>> for &Localized<S> {
    type Output = Localized<S>;

    fn add(self, rhs: &Localized<S>) -> Localized<S> {
        let e = self.denom_exponent.max(rhs.denom_exponent);
        Localized::new(&self.lift(e) + &rhs.lift(e), e)
    }
}

impl<S: Scalar> Sub<&Localized<S>> for &Localized<S> {
    type Output = Localized<S>;

    fn sub(self, rhs: &Localized<S>) -> Localized<S> {
        let e = self.denom_exponent.max(rhs.denom_exponent);
        Localized::new(&self.lift(e) - &rhs.lift(e), e)
    }
}

impl<S: Scalar> Mul<&Localized<S>> for &Localized<S> {
    type Output = Localized<S>;

    fn mul(self, rhs: &Localized<S>) -> Localized<S> {
        Localized::new(
            &self.numerator * &rhs.numerator,
            self.denom_exponent + rhs.denom_exponent,
        )
    }
}

impl<S: Scalar> Neg for &Localized<S> {
    type Output = Localized<S>;

    fn neg(self) -> Localized<S> {
        Localized {
            numerator: -&self.numerator,
            denom_exponent: self.denom_exponent,
        }
    }
}

impl<S: Scalar> Coefficient for Localized<S> {
    type Scalar = S;

    fn from_scalar(s: S) -> Self {
        Self::from_laurent(Laurent::constant(s))
    }

    fn scale(&self, s: &S) -> Self {
        Localized::new(self.numerator.scale(s), self.denom_exponent)
    }

    /// Units are `c * y^a * (1+y)^b` with `b` of either sign.
    fn inverse(&self) -> Option<Self> {
        if self.numerator.is_zero() {
            return None;
        }
        let mut core = self.numerator.clone();
        let mut factors = 0u32;
        while let Ok(q) = core.divide_by_one_plus_y() {
            core = q;
            factors += 1;
        }
        let core_inv = core.inverse()?;
        let exp = self.denom_exponent as i32 - factors as i32;
        Some(&Localized::from_laurent(core_inv) * &Localized::one_plus_y_pow(exp))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use proptest::prelude::*;

    type L = Laurent<Rational>;
    type Loc = Localized<Rational>;

    fn lp(s: &str) -> L {
        s.parse().unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn basic_products() {
        assert_eq!(lp("1 + y") * lp("1 - y"), lp("1 - y^2"));
        assert_eq!(lp("y^-1") * lp("y"), L::one());
    }

    #[test]
    fn localized_cancels_common_factor() {
        let c = Loc::new(lp("1"), 0);
        assert_eq!(c, Loc::one());
        let sq = lp("1 + 2*y + y^2");
        let c = Loc::new(sq, 1);
        assert_eq!(c.numerator(), &lp("1 + y"));
        assert_eq!(c.denom_exponent(), 0);
    }

    #[test]
    fn division_by_one_plus_y() {
        assert_eq!(lp("1 - y^2").divide_by_one_plus_y().unwrap(), lp("1 - y"));
        assert_eq!(
            lp("1 + 2*y + y^2").divide_by_one_plus_y().unwrap(),
            lp("1 + y")
        );
        assert_eq!(
            lp("1 + y^2").divide_by_one_plus_y(),
            Err(LaurentError::NotDivisible { value: "2".into() })
        );
        assert_eq!(
            lp("y^-2 + y^-1").divide_by_one_plus_y().unwrap(),
            lp("y^-2")
        );
        assert_eq!(L::zero().divide_by_one_plus_y().unwrap(), L::zero());
    }

    #[test]
    fn evaluation() {
        assert_eq!(lp("1 - y + y^2").eval_at(&q(-1, 1)).unwrap(), q(3, 1));
        assert_eq!(L::one_plus_y().pow(3).eval_at(&q(-1, 1)).unwrap(), q(0, 1));
        assert_eq!(lp("y^-1").eval_at(&q(2, 1)).unwrap(), q(1, 2));
        assert!(matches!(
            lp("y^-1").eval_at(&q(0, 1)),
            Err(LaurentError::Pole { .. })
        ));
        let pole = Loc::new(L::one(), 2);
        assert!(matches!(
            pole.eval_at(&q(-1, 1)),
            Err(LaurentError::Pole { .. })
        ));
        assert_eq!(pole.eval_at(&q(1, 1)).unwrap(), q(1, 4));
    }

    #[test]
    fn rendering() {
        assert_eq!(L::zero().render(), "0");
        assert_eq!(lp("3 + 2*y - 1/2*y^-1").render(), "-1/2*y^-1 + 3 + 2*y");
        assert_eq!(lp("-y^2 + 1").render(), "1 - y^2");
        assert_eq!(lp("-y").render(), "-y");
        assert_eq!(Loc::new(L::one(), 1).render(), "(1)/(1 + y)");
    }

    #[test]
    fn parse_rejects_garbage() {
        for bad in ["", "y^", "x", "1/0", "2**y", "+"] {
            assert!(bad.parse::<L>().is_err(), "{bad}");
        }
    }

    #[test]
    fn localized_units() {
        let u = &Loc::from_laurent(lp("2*y")) * &Loc::one_plus_y_pow(-3);
        let inv = u.inverse().unwrap();
        assert_eq!(&u * &inv, Loc::one());
        assert!(Loc::from_laurent(lp("1 + y^2")).inverse().is_none());
        assert_eq!(L::one_plus_y().inverse(), None);
        assert_eq!(lp("4*y^3").inverse().unwrap(), lp("1/4*y^-3"));
    }

    fn arb_laurent() -> impl Strategy<Value = L> {
        proptest::collection::vec((-3i32..4, -5i64..6, 1i64..4), 0..5)
            .prop_map(|ts| L::from_terms(ts.into_iter().map(|(e, n, d)| (e, q(n, d)))))
    }

    fn arb_localized() -> impl Strategy<Value = Loc> {
        (arb_laurent(), 0u32..3).prop_map(|(n, e)| Loc::new(n, e))
    }

    proptest! {
        #[test]
        fn laurent_ring_axioms(a in arb_laurent(), b in arb_laurent(), c in arb_laurent()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&(&a + &b) - &b, a.clone());
        }

        #[test]
        fn divide_inverts_multiplication(a in arb_laurent()) {
            let p = &a * &L::one_plus_y();
            prop_assert_eq!(p.divide_by_one_plus_y().unwrap(), a.clone());
            if let Ok(q) = a.divide_by_one_plus_y() {
                prop_assert_eq!(&q * &L::one_plus_y(), a);
            }
        }

        #[test]
        fn render_parse_round_trip(a in arb_laurent()) {
            prop_assert_eq!(a.render().parse::<L>().unwrap(), a);
        }

        #[test]
        fn localized_ring_axioms(a in arb_localized(), b in arb_localized(), c in arb_localized()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&(&a - &b) + &b, a.clone());
        }

        #[test]
        fn canonical_form_is_idempotent(n in arb_laurent(), e in 0u32..4) {
            let c = Loc::new(n, e);
            let again = Loc::new(c.numerator().clone(), c.denom_exponent());
            prop_assert_eq!(&again, &c);
            if c.denom_exponent() > 0 {
                prop_assert!(!c.numerator().is_divisible_by_one_plus_y());
            }
        }
    }
}
