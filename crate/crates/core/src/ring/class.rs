use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::One;

use super::{Monomial, PowerSeries, RingError, RingPresentation};
use crate::scalar::Coefficient;

/// An element of a presented graded ring, always in normal form, with
/// coefficients in any `Q`-algebra `C`.
#[derive(Clone)]
pub struct GradedClass<C: Coefficient> {
    pres: Arc<RingPresentation<C::Scalar>>,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coefficient> GradedClass<C> {
    pub fn zero(pres: &Arc<RingPresentation<C::Scalar>>) -> Self {
        GradedClass {
            pres: pres.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(pres: &Arc<RingPresentation<C::Scalar>>) -> Self {
        Self::constant(pres, C::one())
    }

    pub fn constant(pres: &Arc<RingPresentation<C::Scalar>>, c: C) -> Self {
        Self::from_raw(pres, BTreeMap::from([(pres.unit_monomial(), c)]))
    }

    pub fn generator(pres: &Arc<RingPresentation<C::Scalar>>, index: usize) -> Self {
        let mut m = pres.unit_monomial();
        m[index] += 1;
        Self::from_raw(pres, BTreeMap::from([(m, C::one())]))
    }

    pub fn named_generator(pres: &Arc<RingPresentation<C::Scalar>>, name: &str) -> Option<Self> {
        pres.generator_index(name).map(|i| Self::generator(pres, i))
    }

    pub fn monomial(pres: &Arc<RingPresentation<C::Scalar>>, m: Monomial, c: C) -> Self {
        Self::from_raw(pres, BTreeMap::from([(m, c)]))
    }

    /// Reduce arbitrary terms to normal form.
    pub fn from_raw(pres: &Arc<RingPresentation<C::Scalar>>, raw: BTreeMap<Monomial, C>) -> Self {
        // Substitution coefficients are scalars, so reduce monomial by monomial.
        let mut terms = BTreeMap::new();
        for (m, c) in raw {
            if c.is_zero() {
                continue;
            }
            let unit = BTreeMap::from([(m, C::Scalar::one())]);
            for (m2, s) in pres.reduce_terms(unit) {
                accumulate(&mut terms, m2, c.scale(&s));
            }
        }
        GradedClass {
            pres: pres.clone(),
            terms,
        }
    }

    pub(crate) fn from_terms(
        pres: &Arc<RingPresentation<C::Scalar>>,
        terms: BTreeMap<Monomial, C>,
    ) -> Self {
        GradedClass {
            pres: pres.clone(),
            terms,
        }
    }

    pub fn presentation(&self) -> &Arc<RingPresentation<C::Scalar>> {
        &self.pres
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &[u32]) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&self.pres.unit_monomial())
    }

    /// Homogeneous component of degree `d`.
    pub fn component(&self, d: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| self.pres.monomial_degree(m) == d)
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        GradedClass {
            pres: self.pres.clone(),
            terms,
        }
    }

    /// Degrees carrying a nonzero component, ascending.
    pub fn degrees(&self) -> Vec<u32> {
        let mut ds: Vec<u32> = self
            .terms
            .keys()
            .map(|m| self.pres.monomial_degree(m))
            .collect();
        ds.sort_unstable();
        ds.dedup();
        ds
    }

    /// Coefficient of the point class; zero off top degree.
    pub fn degree(&self) -> C {
        self.coeff(self.pres.point_class())
    }

    fn same_presentation(&self, other: &Self) -> Result<(), RingError> {
        if Arc::ptr_eq(&self.pres, &other.pres) || *self.pres == *other.pres {
            Ok(())
        } else {
            Err(RingError::PresentationMismatch(
                self.pres.name().into(),
                other.pres.name().into(),
            ))
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, RingError> {
        self.same_presentation(other)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            accumulate(&mut terms, m.clone(), c.clone());
        }
        Ok(GradedClass {
            pres: self.pres.clone(),
            terms,
        })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, RingError> {
        self.same_presentation(other)?;
        let mut terms = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m: Monomial = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                if self.pres.is_killed(&m) {
                    continue;
                }
                accumulate(&mut terms, m, c1.clone() * c2.clone());
            }
        }
        Ok(GradedClass {
            pres: self.pres.clone(),
            terms,
        })
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut terms = BTreeMap::new();
        for (m, v) in &self.terms {
            accumulate(&mut terms, m.clone(), v.clone() * c.clone());
        }
        GradedClass {
            pres: self.pres.clone(),
            terms,
        }
    }

    pub fn scale_scalar(&self, s: &C::Scalar) -> Self {
        let mut terms = BTreeMap::new();
        for (m, v) in &self.terms {
            accumulate(&mut terms, m.clone(), v.scale(s));
        }
        GradedClass {
            pres: self.pres.clone(),
            terms,
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one(&self.pres);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Change coefficient ring over the same presentation.
    pub fn map_coeffs<D, F>(&self, f: F) -> GradedClass<D>
    where
        D: Coefficient<Scalar = C::Scalar>,
        F: Fn(&C) -> D,
    {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            accumulate(&mut terms, m.clone(), f(c));
        }
        GradedClass {
            pres: self.pres.clone(),
            terms,
        }
    }

    /// Multiply each homogeneous piece of degree `d` by `factor(d)`.
    pub fn map_by_degree<F: Fn(u32) -> C>(&self, factor: F) -> Self {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let d = self.pres.monomial_degree(m);
            accumulate(&mut terms, m.clone(), c.clone() * factor(d));
        }
        GradedClass {
            pres: self.pres.clone(),
            terms,
        }
    }

    /// Inverse of a class with invertible constant term.
    pub fn inverse(&self) -> Result<Self, RingError> {
        let c0 = self.constant_term();
        let inv0 = c0.inverse().ok_or(RingError::ConstantTerm {
            expected: "invertible",
        })?;
        // (c0 (1 + a))^{-1} = c0^{-1} sum (-a)^k, a nilpotent
        let a = &self.scale(&inv0) - &Self::one(&self.pres);
        let series = PowerSeries::geometric_alternating(self.pres.dimension());
        Ok(series.compose_class(&a)?.scale(&inv0))
    }

    /// `exp(a)` for `a` with zero constant term.
    pub fn series_exp(&self) -> Result<Self, RingError> {
        if !self.constant_term().is_zero() {
            return Err(RingError::ConstantTerm {
                expected: "0 for exp",
            });
        }
        PowerSeries::exp(self.pres.dimension()).compose_class(self)
    }

    /// `log(a)` for `a` with constant term 1.
    pub fn series_log(&self) -> Result<Self, RingError> {
        if !self.constant_term().is_one() {
            return Err(RingError::ConstantTerm {
                expected: "1 for log",
            });
        }
        let shifted = self - &Self::one(&self.pres);
        PowerSeries::log_one_plus(self.pres.dimension()).compose_class(&shifted)
    }

    /// `f(a) = sum f_k a^k` for `a` with zero constant term.
    pub fn series_compose(&self, f: &PowerSeries<C>) -> Result<Self, RingError> {
        f.compose_class(self)
    }

    fn fmt_terms(&self, f: &mut fmt::Formatter<'_>, render: impl Fn(&C) -> String) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let gens = self.pres.generators();
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let mono: Vec<String> = m
                .iter()
                .enumerate()
                .filter(|(_, e)| **e > 0)
                .map(|(i, e)| {
                    if *e == 1 {
                        gens[i].name.clone()
                    } else {
                        format!("{}^{}", gens[i].name, e)
                    }
                })
                .collect();
            if mono.is_empty() {
                write!(f, "({})", render(c))?;
            } else {
                write!(f, "({})*{}", render(c), mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl<C: Coefficient + fmt::Display> fmt::Display for GradedClass<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_terms(f, |c| c.to_string())
    }
}

impl<C: Coefficient> fmt::Debug for GradedClass<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GradedClass[{}](", self.pres.name())?;
        self.fmt_terms(f, |c| format!("{c:?}"))?;
        f.write_str(")")
    }
}

impl<C: Coefficient> PartialEq for GradedClass<C> {
    fn eq(&self, other: &Self) -> bool {
        self.same_presentation(other).is_ok() && self.terms == other.terms
    }
}

fn accumulate<C: Coefficient>(map: &mut BTreeMap<Monomial, C>, m: Monomial, c: C) {
    if c.is_zero() {
        return;
    }
    let sum = match map.remove(&m) {
        Some(old) => old + c,
        None => c,
    };
    if !sum.is_zero() {
        map.insert(m, sum);
    }
}

// Operators panic on presentation mismatch; use the `checked_*` forms to recover.

impl<C: Coefficient> Add<&GradedClass<C>> for &GradedClass<C> {
    type Output = GradedClass<C>;

    fn add(self, rhs: &GradedClass<C>) -> GradedClass<C> {
        self.checked_add(rhs)
            .expect("graded classes in different presentations")
    }
}

impl<C: Coefficient> Sub<&GradedClass<C>> for &GradedClass<C> {
    type Output = GradedClass<C>;

    fn sub(self, rhs: &GradedClass<C>) -> GradedClass<C> {
        self.checked_add(&-rhs)
            .expect("graded classes in different presentations")
    }
}

impl<C: Coefficient> Mul<&GradedClass<C>> for &GradedClass<C> {
    type Output = GradedClass<C>;

    fn mul(self, rhs: &GradedClass<C>) -> GradedClass<C> {
        self.checked_mul(rhs)
            .expect("graded classes in different presentations")
    }
}

impl<C: Coefficient> Neg for &GradedClass<C> {
    type Output = GradedClass<C>;

    fn neg(self) -> GradedClass<C> {
        GradedClass {
            pres: self.pres.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }
}
