//! Multiplicative characteristic classes of (virtual) bundles.
//!
//! A bundle is known only through its rank and total Chern class. Genera are
//! evaluated from power sums of the Chern roots:
//! `prod_i Q(x_i) = Q(0)^rank * exp(sum_k l_k p_k)` with `l = log(Q/Q(0))`.

use std::sync::Arc;

use num_traits::One;
use thiserror::Error;

use crate::laurent::Laurent;
use crate::ring::{GradedClass, PowerSeries, RingError, RingPresentation};
use crate::scalar::{Coefficient, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenusError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("total Chern class must have constant term 1")]
    ChernConstant,
    #[error("series constant term is not a unit and no localized route exists")]
    NonUnitConstant,
    #[error("genus has a (1+y) denominator in degree {degree}")]
    Denominator { degree: u32 },
}

/// Rank and total Chern class of a virtual bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct BundleClass<S: Scalar> {
    rank: i64,
    total_chern: GradedClass<S>,
}

impl<S: Scalar> BundleClass<S> {
    pub fn new(rank: i64, total_chern: GradedClass<S>) -> Result<Self, GenusError> {
        if !total_chern.constant_term().is_one() {
            return Err(GenusError::ChernConstant);
        }
        Ok(BundleClass { rank, total_chern })
    }

    pub fn trivial(pres: &Arc<RingPresentation<S>>, rank: i64) -> Self {
        BundleClass {
            rank,
            total_chern: GradedClass::one(pres),
        }
    }

    /// Line bundle with first Chern class `root`.
    pub fn line(root: &GradedClass<S>) -> Result<Self, GenusError> {
        if !root.constant_term().is_zero() {
            return Err(GenusError::ChernConstant);
        }
        let c = &GradedClass::one(root.presentation()) + root;
        Ok(BundleClass {
            rank: 1,
            total_chern: c,
        })
    }

    /// Direct sum of line bundles with the given roots.
    pub fn split(
        pres: &Arc<RingPresentation<S>>,
        roots: &[GradedClass<S>],
    ) -> Result<Self, GenusError> {
        let mut out = Self::trivial(pres, 0);
        for r in roots {
            out = out.whitney_sum(&Self::line(r)?)?;
        }
        Ok(out)
    }

    pub fn presentation(&self) -> &Arc<RingPresentation<S>> {
        self.total_chern.presentation()
    }

    pub fn rank(&self) -> i64 {
        self.rank
    }

    pub fn total_chern(&self) -> &GradedClass<S> {
        &self.total_chern
    }

    /// `c_k`.
    pub fn chern(&self, k: u32) -> GradedClass<S> {
        self.total_chern.component(k)
    }

    pub fn whitney_sum(&self, other: &Self) -> Result<Self, GenusError> {
        Ok(BundleClass {
            rank: self.rank + other.rank,
            total_chern: self.total_chern.checked_mul(&other.total_chern)?,
        })
    }

    /// The virtual bundle `self - other`.
    pub fn difference(&self, other: &Self) -> Result<Self, GenusError> {
        let inv = other.total_chern.inverse()?;
        Ok(BundleClass {
            rank: self.rank - other.rank,
            total_chern: self.total_chern.checked_mul(&inv)?,
        })
    }

    /// `c_k(E^*) = (-1)^k c_k(E)`.
    pub fn dual(&self) -> Self {
        let c = self
            .total_chern
            .map_by_degree(|d| if d % 2 == 0 { S::one() } else { -S::one() });
        BundleClass {
            rank: self.rank,
            total_chern: c,
        }
    }
}

/// Power sums `p_1..p_dim` of the Chern roots by Newton's identities.
pub fn chern_to_power_sums<S: Scalar>(b: &BundleClass<S>) -> Vec<GradedClass<S>> {
    let n = b.presentation().dimension();
    let c: Vec<GradedClass<S>> = (0..=n).map(|k| b.chern(k)).collect();
    let mut p: Vec<GradedClass<S>> = Vec::with_capacity(n as usize);
    for k in 1..=n as usize {
        let sign = |i: usize| if i % 2 == 1 { S::one() } else { -S::one() };
        let mut acc = c[k].scale_scalar(&(sign(k) * S::from_ratio(k as i64, 1)));
        for i in 1..k {
            acc = &acc + &(&c[i] * &p[k - i - 1]).scale_scalar(&sign(i));
        }
        p.push(acc);
    }
    p
}

/// Formal product of `q` over the Chern roots of `b`, whenever `q(0)` is a
/// unit of the coefficient ring.
pub fn genus_from_series<C>(
    q: &PowerSeries<C>,
    b: &BundleClass<C::Scalar>,
) -> Result<GradedClass<C>, GenusError>
where
    C: Coefficient,
{
    let pres = b.presentation();
    let q0 = q.coeff(0);
    let inv0 = q0.inverse().ok_or(GenusError::NonUnitConstant)?;
    let l = q.scale(&inv0).log()?;
    let mut exponent = GradedClass::<C>::zero(pres);
    for (k, pk) in chern_to_power_sums(b).iter().enumerate() {
        let lk = l.coeff(k + 1);
        if lk.is_zero() {
            continue;
        }
        exponent = &exponent + &pk.map_coeffs(|s| C::from_scalar(s.clone())).scale(&lk);
    }
    let base = if b.rank >= 0 { q0 } else { inv0 };
    let mut factor = C::one();
    for _ in 0..b.rank.unsigned_abs() {
        factor = factor * base.clone();
    }
    Ok(exponent.series_exp()?.scale(&factor))
}

/// [`genus_from_series`] for Laurent coefficients whose constant term is
/// `u (1+y)^b` with `u` a monomial.
///
/// The series is rescaled to `Q(0)^{-1} Q((1+y)^b x)`, which has constant
/// term 1 and Laurent coefficients; the degree-`j` part of its genus is then divided by `(1+y)^{bj}`.
pub fn laurent_genus<S: Scalar>(
    q: &PowerSeries<Laurent<S>>,
    b: &BundleClass<S>,
) -> Result<GradedClass<Laurent<S>>, GenusError> {
    let q0 = q.coeff(0);
    if q0.inverse().is_some() {
        return genus_from_series(q, b);
    }
    let mut unit = q0.clone();
    let mut power = 0u32;
    while unit.inverse().is_none() {
        unit = unit
            .divide_by_one_plus_y()
            .map_err(|_| GenusError::NonUnitConstant)?;
        power += 1;
    }
    if b.rank < 0 {
        return Err(GenusError::Denominator { degree: 0 });
    }
    let inv = unit.inverse().expect("loop exits on a unit");
    let shift = Laurent::one_plus_y().pow(power);
    let mut coeffs = vec![Laurent::one()];
    let mut factor = inv;
    for k in 1..=q.order() as usize {
        coeffs.push(&q.coeff(k) * &factor);
        factor = &factor * &shift;
    }
    let rescaled = PowerSeries::new(coeffs, q.order());
    let g = genus_from_series(
        &rescaled,
        &BundleClass {
            rank: 0,
            total_chern: b.total_chern.clone(),
        },
    )?;
    let pres = b.presentation();
    let scale = q0.pow(b.rank as u32);
    let mut terms = Vec::new();
    for (m, c) in g.terms() {
        let degree = pres.monomial_degree(m);
        let mut c = c * &scale;
        for _ in 0..power * degree {
            c = c
                .divide_by_one_plus_y()
                .map_err(|_| GenusError::Denominator { degree })?;
        }
        terms.push((m.clone(), c));
    }
    Ok(GradedClass::from_raw(pres, terms.into_iter().collect()))
}

/// `x / (1 - e^{-x})` up to `order`.
pub fn todd_series<C: Coefficient>(order: u32) -> PowerSeries<C> {
    let e = PowerSeries::<C>::exp(order + 1).scale_variable(&-C::one());
    let one = PowerSeries::constant(C::one(), order + 1);
    let s = (&one - &e).shift_down();
    PowerSeries::new(s.coeffs().to_vec(), order)
        .inverse()
        .expect("(1 - e^-x)/x has constant term 1")
}

/// `1 + x`.
pub fn chern_series<C: Coefficient>(order: u32) -> PowerSeries<C> {
    PowerSeries::new(vec![C::one(), C::one()], order)
}

/// `1 + y e^x`.
pub fn lambda_series<S: Scalar>(order: u32) -> PowerSeries<Laurent<S>> {
    let e = PowerSeries::<Laurent<S>>::exp(order).scale(&Laurent::y());
    &e + &PowerSeries::constant(Laurent::one(), order)
}

/// `(1 + y e^{-x}) x / (1 - e^{-x})`.
pub fn tilde_t_series<S: Scalar>(order: u32) -> PowerSeries<Laurent<S>> {
    let dual = lambda_series::<S>(order).scale_variable(&-Laurent::one());
    &dual * &todd_series(order)
}

/// `x(1+y) / (1 - e^{-x(1+y)}) - x y`.
pub fn normalized_t_series<S: Scalar>(order: u32) -> PowerSeries<Laurent<S>> {
    let scaled = todd_series::<Laurent<S>>(order).scale_variable(&Laurent::one_plus_y());
    &scaled - &PowerSeries::variable(order).scale(&Laurent::y())
}

pub fn todd<S: Scalar>(b: &BundleClass<S>) -> Result<GradedClass<S>, GenusError> {
    genus_from_series(&todd_series(b.presentation().dimension()), b)
}

/// `ch(lambda_y E) = prod (1 + y e^{x_i})`, constant term `(1+y)^rank`.
pub fn lambda_y_character<S: Scalar>(
    b: &BundleClass<S>,
) -> Result<GradedClass<Laurent<S>>, GenusError> {
    laurent_genus(&lambda_series(b.presentation().dimension()), b)
}

/// Unnormalized Hirzebruch class `ch(lambda_y E^*) td(E)`.
pub fn tilde_t_y<S: Scalar>(b: &BundleClass<S>) -> Result<GradedClass<Laurent<S>>, GenusError> {
    laurent_genus(&tilde_t_series(b.presentation().dimension()), b)
}

/// Normalized Hirzebruch class; at `y = -1` it is the total Chern class.
pub fn normalized_t_y<S: Scalar>(
    b: &BundleClass<S>,
) -> Result<GradedClass<Laurent<S>>, GenusError> {
    laurent_genus(&normalized_t_series(b.presentation().dimension()), b)
}

/// Evaluate every coefficient at `y = y0`.
pub fn specialize<S: Scalar>(
    a: &GradedClass<Laurent<S>>,
    y0: &S,
) -> Result<GradedClass<S>, crate::laurent::LaurentError> {
    for (_, c) in a.terms() {
        c.eval_at(y0)?;
    }
    Ok(a.map_coeffs(|c| c.eval_at(y0).expect("checked above")))
}

/// Products of projective spaces, including the point (no factors).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BuiltinSpace {
    factors: Vec<u32>,
}

impl BuiltinSpace {
    pub fn point() -> Self {
        BuiltinSpace { factors: vec![] }
    }

    pub fn projective(n: u32) -> Self {
        BuiltinSpace { factors: vec![n] }
    }

    /// Zero-dimensional factors are dropped.
    pub fn product(factors: &[u32]) -> Self {
        BuiltinSpace {
            factors: factors.iter().copied().filter(|n| *n > 0).collect(),
        }
    }

    pub fn factors(&self) -> &[u32] {
        &self.factors
    }

    pub fn dimension(&self) -> u32 {
        self.factors.iter().sum()
    }

    pub fn name(&self) -> String {
        if self.factors.is_empty() {
            "pt".into()
        } else {
            self.factors
                .iter()
                .map(|n| format!("P{n}"))
                .collect::<Vec<_>>()
                .join("x")
        }
    }

    pub fn presentation<S: Scalar>(&self) -> Arc<RingPresentation<S>> {
        Arc::new(RingPresentation::product_of_projective_spaces(
            &self.factors,
        ))
    }

    /// `c(T) = prod (1 + h_i)^{n_i + 1}`.
    pub fn tangent_bundle<S: Scalar>(&self, pres: &Arc<RingPresentation<S>>) -> BundleClass<S> {
        let mut c = GradedClass::one(pres);
        for (i, n) in self.factors.iter().enumerate() {
            let one_plus_h = &GradedClass::one(pres) + &GradedClass::generator(pres, i);
            c = &c * &one_plus_h.pow(n + 1);
        }
        BundleClass {
            rank: self.dimension() as i64,
            total_chern: c,
        }
    }

    pub fn cotangent_bundle<S: Scalar>(&self, pres: &Arc<RingPresentation<S>>) -> BundleClass<S> {
        self.tangent_bundle(pres).dual()
    }
}

/// `chi_y(X) = deg T~_y(TX)`.
pub fn chi_y_genus<S: Scalar>(space: &BuiltinSpace) -> Laurent<S> {
    let pres = space.presentation::<S>();
    tilde_t_y(&space.tangent_bundle(&pres))
        .expect("tangent bundles have nonnegative rank")
        .degree()
}
