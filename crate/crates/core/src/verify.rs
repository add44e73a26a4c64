//! Both sides of the specialization identity
//! `(1+y) MHC_y(Psi'_f(b)) = i^! MHC_y(b)` in a presented `G_0(X_0)[y, y^-1]`,
//! its homology-level form after `td_*`, and the `y = -1` shadow.

use std::sync::Arc;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::genus::{normalized_t_y, tilde_t_y, todd, BuiltinSpace, BundleClass, GenusError};
use crate::kgroup::{
    basis_character, basis_multi_indices, character_to_basis, gysin_shriek, KClass, KError,
};
use crate::laurent::{Laurent, LaurentError, Localized};
use crate::motivic::{MotivicClass, MotivicError, TwistRule};
use crate::nearby::{NearbyError, SNCScenario};
use crate::ring::GradedClass;
use crate::scalar::Scalar;
use crate::Rational;

pub const BUILTIN_FLAG: &str = "built-in presentation (sound)";
pub const USER_FLAG: &str = "user presentation (equality modulo declared relations)";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Nearby(#[from] NearbyError),
    #[error(transparent)]
    Motivic(#[from] MotivicError),
    #[error(transparent)]
    K(#[from] KError),
    #[error(transparent)]
    Genus(#[from] GenusError),
    #[error("scenario `{0}` is not a built-in product family")]
    NotProductFamily(String),
    #[error("calibration on `{scenario}` is ambiguous: {zero_defects} conventions give defect 0")]
    Ambiguous {
        scenario: String,
        zero_defects: usize,
    },
}

/// `y = -1` comparison of Euler-level numbers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Shadow {
    Values {
        left: Rational,
        right: Rational,
        agree: bool,
    },
    /// The right side is not divisible by `(1+y)`.
    Pole(String),
}

impl Shadow {
    pub fn agrees(&self) -> bool {
        matches!(self, Shadow::Values { agree: true, .. })
    }
}

/// Homology-level check in `A_*(M) (x) Q[y]` for compact product families.
#[derive(Debug, Clone, PartialEq)]
pub struct HomologyCheck {
    pub lhs: GradedClass<Laurent<Rational>>,
    pub rhs: GradedClass<Laurent<Rational>>,
    pub pass: bool,
    /// Largest `(1+y)` denominator left after normalizing either side.
    pub normalized_denominator: u32,
    pub normalized_pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub scenario: String,
    pub convention: TwistRule,
    pub completeness: &'static str,
    pub lhs: KClass<Rational>,
    pub rhs: KClass<Rational>,
    pub defect: KClass<Rational>,
    pub pass: bool,
    pub divisible: bool,
    pub shadow: Shadow,
    pub acampo: (i64, i64, bool),
    pub homology: Option<HomologyCheck>,
    pub duration: Duration,
}

/// `LHS = (1+y) MHC_y(Psi'(input))` under `convention`,
/// `RHS = i^! MHC_y(input)` under the naive rule.
pub fn check_theorem(
    s: &SNCScenario,
    input: &MotivicClass,
    convention: TwistRule,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let (lhs, rhs) = theorem_sides(s, input, convention)?;
    let defect = lhs.checked_sub(&rhs)?;
    let divisible = rhs.is_divisible_by_one_plus_y();
    let psi = s.nearby_transform(input)?;
    let shadow = shadow_of(&psi, &rhs);
    let homology = match &s.family {
        Some(_) if *input == s.identity_class() => Some(homology_check(s, &rhs)?),
        _ => None,
    };
    Ok(VerificationReport {
        scenario: s.id.clone(),
        convention,
        completeness: if s.builtin { BUILTIN_FLAG } else { USER_FLAG },
        pass: defect.is_zero(),
        lhs,
        rhs,
        defect,
        divisible,
        shadow,
        acampo: s.acampo_check(),
        homology,
        duration: start.elapsed(),
    })
}

pub fn theorem_sides(
    s: &SNCScenario,
    input: &MotivicClass,
    convention: TwistRule,
) -> Result<(KClass<Rational>, KClass<Rational>), VerifyError> {
    let psi = s.nearby_transform(input)?;
    let lhs = psi
        .mhc_y::<Rational>(s.fiber.base(), convention)?
        .scale(&Laurent::one_plus_y());
    let source = input.mhc_y::<Rational>(s.ambient.base(), TwistRule::Naive)?;
    let rhs = gysin_shriek(&source, &s.gysin)?;
    Ok((lhs, rhs))
}

fn shadow_of(psi: &MotivicClass, rhs: &KClass<Rational>) -> Shadow {
    let left = Rational::from_ratio(psi.euler_of(), 1);
    match rhs.divide_by_one_plus_y() {
        Err(e) => Shadow::Pole(e.to_string()),
        Ok(q) => {
            let minus_one = -Rational::one();
            let mut right = Rational::zero();
            for (g, c) in q.terms() {
                let v = c
                    .eval_at(&minus_one)
                    .expect("Laurent polynomials are finite at -1");
                right += v * Rational::from_ratio(q.presentation().generators()[g].point_degree, 1);
            }
            Shadow::Values {
                agree: left == right,
                left,
                right,
            }
        }
    }
}

/// `(euler(Psi'), degree of (RHS/(1+y)) at y = -1, equal)` for `[id_X]`.
/// The degree functional is zero on non-compact generators.
pub fn check_verdier_shadow(s: &SNCScenario) -> Result<Shadow, VerifyError> {
    let input = s.identity_class();
    let source = input.mhc_y::<Rational>(s.ambient.base(), TwistRule::Naive)?;
    let rhs = gysin_shriek(&source, &s.gysin)?;
    Ok(shadow_of(&s.nearby_class(), &rhs))
}

/// Report for the identity class.
pub fn check_identity(
    s: &SNCScenario,
    convention: TwistRule,
) -> Result<VerificationReport, VerifyError> {
    check_theorem(s, &s.identity_class(), convention)
}

/// Both conventions on the calibration scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub scenario: String,
    pub naive: VerificationReport,
    pub shifted: VerificationReport,
    pub chosen: TwistRule,
}

impl Calibration {
    pub fn report(&self, rule: TwistRule) -> &VerificationReport {
        match rule {
            TwistRule::Naive => &self.naive,
            TwistRule::Shifted => &self.shifted,
        }
    }
}

/// Fix the convention by requiring defect 0 on `s`; exactly one of the two
/// values must pass.
pub fn calibrate(s: &SNCScenario) -> Result<Calibration, VerifyError> {
    let naive = check_identity(s, TwistRule::Naive)?;
    let shifted = check_identity(s, TwistRule::Shifted)?;
    let chosen = match (naive.pass, shifted.pass) {
        (true, false) => TwistRule::Naive,
        (false, true) => TwistRule::Shifted,
        (a, b) => {
            return Err(VerifyError::Ambiguous {
                scenario: s.id.clone(),
                zero_defects: usize::from(a) + usize::from(b),
            })
        }
    };
    Ok(Calibration {
        scenario: s.id.clone(),
        naive,
        shifted,
        chosen,
    })
}

/// Two computations of `i^! MHC_y([M x A^1])` for a product family.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothCaseReport {
    pub theorem: VerificationReport,
    /// `lambda_y(i^* T^* M') = lambda_y(N^*) lambda_y(T^* M_0)`, on the fiber basis.
    pub lambda_route: KClass<Rational>,
    /// `lambda_y(N^*)`; must be the constant `1 + y`.
    pub normal_lambda: GradedClass<Laurent<Rational>>,
    pub normal_is_one_plus_y: bool,
    pub whitney_holds: bool,
    pub routes_agree: bool,
}

impl SmoothCaseReport {
    pub fn pass(&self) -> bool {
        self.theorem.pass && self.normal_is_one_plus_y && self.whitney_holds && self.routes_agree
    }
}

pub fn check_smooth_case(
    s: &SNCScenario,
    convention: TwistRule,
) -> Result<SmoothCaseReport, VerifyError> {
    let factors = s
        .family
        .clone()
        .ok_or_else(|| VerifyError::NotProductFamily(s.id.clone()))?;
    let theorem = check_identity(s, convention)?;
    let space = BuiltinSpace::product(&factors);
    let ring = space.presentation::<Rational>();
    let cotangent_m0 = space.cotangent_bundle(&ring);
    // T^* M' restricted to M_0 = T^* M_0 + N^*, with N^* trivial of rank 1
    let normal = BundleClass::trivial(&ring, 1);
    let restricted = cotangent_m0.whitney_sum(&normal)?;
    let lam_restricted = crate::genus::lambda_y_character(&restricted)?;
    let lam_normal = crate::genus::lambda_y_character(&normal)?;
    let lam_m0 = crate::genus::lambda_y_character(&cotangent_m0)?;
    let whitney_holds = lam_restricted == &lam_normal * &lam_m0;
    let normal_is_one_plus_y = lam_normal == GradedClass::constant(&ring, Laurent::one_plus_y());
    let coords = character_to_basis(space.factors(), &lam_restricted);
    let lambda_route = KClass::from_terms(s.fiber.base(), coords.into_iter().enumerate());
    let routes_agree = lambda_route == theorem.lhs && lambda_route == theorem.rhs;
    Ok(SmoothCaseReport {
        theorem,
        lambda_route,
        normal_lambda: lam_normal,
        normal_is_one_plus_y,
        whitney_holds,
        routes_agree,
    })
}

/// `td_*` of a fiber class of a product family: `ch(F) td(TM)`.
fn td_star(
    factors: &[u32],
    k: &KClass<Rational>,
) -> Result<GradedClass<Laurent<Rational>>, VerifyError> {
    let space = BuiltinSpace::product(factors);
    let ring = space.presentation::<Rational>();
    let td = todd(&space.tangent_bundle(&ring))?.map_coeffs(|c| Laurent::constant(c.clone()));
    let mut ch = GradedClass::zero(&ring);
    for (i, c) in basis_multi_indices(factors).iter().enumerate() {
        let chb = basis_character(&ring, c).map_coeffs(|s| Laurent::constant(s.clone()));
        ch = &ch + &chb.scale(&k.coeff(i));
    }
    Ok(&ch * &td)
}

/// Homology degree `k = dim - j` of cohomological degree `j` is divided by
/// `(1+y)^k`.
fn normalize(a: &GradedClass<Laurent<Rational>>, dim: u32) -> GradedClass<Localized<Rational>> {
    a.map_coeffs(|c| Localized::from_laurent(c.clone()))
        .map_by_degree(|j| Localized::one_plus_y_pow(j as i32 - dim as i32))
}

fn max_denominator(a: &GradedClass<Localized<Rational>>) -> u32 {
    a.terms()
        .map(|(_, c)| c.denom_exponent())
        .max()
        .unwrap_or(0)
}

fn homology_check(s: &SNCScenario, rhs: &KClass<Rational>) -> Result<HomologyCheck, VerifyError> {
    let factors = s
        .family
        .clone()
        .ok_or_else(|| VerifyError::NotProductFamily(s.id.clone()))?;
    let space = BuiltinSpace::product(&factors);
    let ring = space.presentation::<Rational>();
    let tangent = space.tangent_bundle(&ring);
    let lhs = tilde_t_y(&tangent)?.scale(&Laurent::one_plus_y());
    let rhs = td_star(&factors, rhs)?;
    let pass = lhs == rhs;
    let dim = space.dimension();
    let (nl, nr) = (normalize(&lhs, dim), normalize(&rhs, dim));
    let normalized_denominator = max_denominator(&nl).max(max_denominator(&nr));
    let direct = normalized_t_y(&tangent)?
        .map_coeffs(|c| Localized::from_laurent(c.clone()))
        .scale(&Localized::from_laurent(Laurent::one_plus_y()));
    let normalized_pass = normalized_denominator == 0 && nl == nr && nl == direct;
    Ok(HomologyCheck {
        lhs,
        rhs,
        pass,
        normalized_denominator,
        normalized_pass,
    })
}

/// Homology-level identity for a compact product family.
pub fn check_corollary(s: &SNCScenario) -> Result<HomologyCheck, VerifyError> {
    if s.family.is_none() {
        return Err(VerifyError::NotProductFamily(s.id.clone()));
    }
    let (_, rhs) = theorem_sides(s, &s.identity_class(), TwistRule::Naive)?;
    homology_check(s, &rhs)
}

/// Evaluate a K-class at a rational `y`, rendered generator by generator.
pub fn evaluate_class<S: Scalar>(k: &KClass<S>, y0: &S) -> Result<Vec<(String, S)>, LaurentError> {
    Ok(k.eval_at(y0)?
        .into_iter()
        .map(|(g, v)| (k.presentation().generators()[g].name.clone(), v))
        .collect())
}

/// Shared report for tests and callers that ignore timings.
pub fn without_duration(mut r: VerificationReport) -> VerificationReport {
    r.duration = Duration::ZERO;
    r
}

#[allow(dead_code)]
fn _assert_send_sync() {
    fn check<T: Send + Sync>() {}
    check::<SNCScenario>();
    check::<VerificationReport>();
    check::<Arc<SNCScenario>>();
}
