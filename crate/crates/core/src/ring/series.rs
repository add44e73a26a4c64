use std::ops::{Add, Mul, Sub};

use num_traits::One;

use super::{GradedClass, RingError};
use crate::scalar::{Coefficient, Scalar};

/// Truncated power series `sum_{k <= order} c_k x^k` in one variable.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries<C> {
    coeffs: Vec<C>,
}

impl<C: Coefficient> PowerSeries<C> {
    /// Coefficients beyond `order` are dropped, missing ones are zero.
    pub fn new(mut coeffs: Vec<C>, order: u32) -> Self {
        coeffs.resize(order as usize + 1, C::zero());
        PowerSeries { coeffs }
    }

    pub fn order(&self) -> u32 {
        (self.coeffs.len() - 1) as u32
    }

    pub fn coeff(&self, k: usize) -> C {
        self.coeffs.get(k).cloned().unwrap_or_else(C::zero)
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn constant(c: C, order: u32) -> Self {
        Self::new(vec![c], order)
    }

    /// `x` itself.
    pub fn variable(order: u32) -> Self {
        Self::new(vec![C::zero(), C::one()], order)
    }

    /// `e^x`.
    pub fn exp(order: u32) -> Self {
        let mut coeffs = Vec::with_capacity(order as usize + 1);
        let mut c = C::Scalar::one();
        for k in 0..=order as i64 {
            if k > 0 {
                c = c / C::Scalar::from_ratio(k, 1);
            }
            coeffs.push(C::from_scalar(c.clone()));
        }
        PowerSeries { coeffs }
    }

    /// `log(1 + x)`.
    pub fn log_one_plus(order: u32) -> Self {
        let coeffs = (0..=order as i64)
            .map(|k| match k {
                0 => C::zero(),
                _ => {
                    let sign = if k % 2 == 1 { 1 } else { -1 };
                    C::from_scalar(C::Scalar::from_ratio(sign, k))
                }
            })
            .collect();
        PowerSeries { coeffs }
    }

    /// `1/(1 + x) = sum (-x)^k`.
    pub fn geometric_alternating(order: u32) -> Self {
        let coeffs = (0..=order)
            .map(|k| if k % 2 == 0 { C::one() } else { -C::one() })
            .collect();
        PowerSeries { coeffs }
    }

    /// `f(c x)`.
    pub fn scale_variable(&self, c: &C) -> Self {
        let mut power = C::one();
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            coeffs.push(a.clone() * power.clone());
            power = power * c.clone();
        }
        PowerSeries { coeffs }
    }

    pub fn scale(&self, c: &C) -> Self {
        PowerSeries {
            coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect(),
        }
    }

    /// Divide by `x`, dropping the constant term; the order is kept and the
    /// top coefficient becomes zero.
    pub fn shift_down(&self) -> Self {
        let order = self.order();
        Self::new(self.coeffs.iter().skip(1).cloned().collect(), order)
    }

    pub fn inverse(&self) -> Result<Self, RingError> {
        let inv0 = self.coeffs[0].inverse().ok_or(RingError::ConstantTerm {
            expected: "invertible",
        })?;
        let n = self.coeffs.len();
        let mut out = vec![C::zero(); n];
        out[0] = inv0.clone();
        for k in 1..n {
            let mut acc = C::zero();
            for j in 1..=k {
                acc = acc + self.coeffs[j].clone() * out[k - j].clone();
            }
            out[k] = -(acc * inv0.clone());
        }
        Ok(PowerSeries { coeffs: out })
    }

    /// `log f` for `f` with constant term 1.
    pub fn log(&self) -> Result<Self, RingError> {
        if !self.coeffs[0].is_one() {
            return Err(RingError::ConstantTerm {
                expected: "1 for log",
            });
        }
        let mut shifted = self.clone();
        shifted.coeffs[0] = C::zero();
        Ok(Self::log_one_plus(self.order()).compose(&shifted))
    }

    /// `f(g)` for `g` with zero constant term.
    pub fn compose(&self, inner: &Self) -> Self {
        let order = self.order().min(inner.order());
        let mut out = Self::constant(C::zero(), order);
        // Horner from the top coefficient
        for a in self.coeffs.iter().rev() {
            out = &(&out * inner) + &Self::constant(a.clone(), order);
        }
        out
    }

    /// `f(a) = sum f_k a^k` inside a truncated graded ring.
    pub fn compose_class(&self, a: &GradedClass<C>) -> Result<GradedClass<C>, RingError> {
        if !a.constant_term().is_zero() {
            return Err(RingError::ConstantTerm {
                expected: "0 for substitution",
            });
        }
        let pres = a.presentation();
        let top = (pres.dimension() as usize).min(self.coeffs.len() - 1);
        let mut out = GradedClass::zero(pres);
        for c in self.coeffs[..=top].iter().rev() {
            out = &(&out * a) + &GradedClass::constant(pres, c.clone());
        }
        Ok(out)
    }
}

impl<C: Coefficient> Add<&PowerSeries<C>> for &PowerSeries<C> {
    type Output = PowerSeries<C>;

    fn add(self, rhs: &PowerSeries<C>) -> PowerSeries<C> {
        let order = self.order().min(rhs.order()) as usize;
        let coeffs = (0..=order)
            .map(|k| self.coeffs[k].clone() + rhs.coeffs[k].clone())
            .collect();
        PowerSeries { coeffs }
    }
}

impl<C: Coefficient> Sub<&PowerSeries<C>> for &PowerSeries<C> {
    type Output = PowerSeries<C>;

    fn sub(self, rhs: &PowerSeries<C>) -> PowerSeries<C> {
        let order = self.order().min(rhs.order()) as usize;
        let coeffs = (0..=order)
            .map(|k| self.coeffs[k].clone() - rhs.coeffs[k].clone())
            .collect();
        PowerSeries { coeffs }
    }
}

impl<C: Coefficient> Mul<&PowerSeries<C>> for &PowerSeries<C> {
    type Output = PowerSeries<C>;

    fn mul(self, rhs: &PowerSeries<C>) -> PowerSeries<C> {
        let order = self.order().min(rhs.order()) as usize;
        let mut coeffs = vec![C::zero(); order + 1];
        for i in 0..=order {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=(order - i) {
                coeffs[i + j] =
                    coeffs[i + j].clone() + self.coeffs[i].clone() * rhs.coeffs[j].clone();
            }
        }
        PowerSeries { coeffs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    type P = PowerSeries<Rational>;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn exp_log_round_trip() {
        let x = P::variable(6);
        let e = P::exp(6).compose(&x.scale(&q(3, 1)));
        let l = e.log().unwrap();
        assert_eq!(l, x.scale(&q(3, 1)));
    }

    #[test]
    fn inverse_of_geometric() {
        let one_plus_x = P::new(vec![q(1, 1), q(1, 1)], 5);
        assert_eq!(one_plus_x.inverse().unwrap(), P::geometric_alternating(5));
        assert!(P::variable(3).inverse().is_err());
    }

    #[test]
    fn scaling_the_variable() {
        let e2 = P::exp(4).scale_variable(&q(2, 1));
        assert_eq!(e2.coeff(3), q(8, 6));
    }

    #[test]
    fn shift_down_divides_by_x() {
        // (e^x - 1)/x = 1 + x/2 + x^2/6 + ...
        let mut s = P::exp(4);
        s = &s - &P::constant(q(1, 1), 4);
        let d = s.shift_down();
        assert_eq!(d.coeffs()[..4], [q(1, 1), q(1, 2), q(1, 6), q(1, 24)]);
        assert_eq!(d.coeff(4), q(0, 1));
    }
}
