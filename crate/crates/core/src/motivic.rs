//! Relative Grothendieck classes of varieties over a base with a presented
//! K-group, and their evaluation to K-classes, `chi_y` and Euler numbers.
//!
//! Every generator is `C x A^d` with `C` a product of projective spaces,
//! mapped to the base. Its pushforward data is the image of each element of
//! the `[O_L]` basis of `K(C)` in the base presentation. Open strata are
//! expanded by additivity into such generators when they are built.
//!
//! Evaluation rules:
//! - smooth generator: `MHC_y[C x A^d -> X] = (1+y)^d * push(lambda_y Omega_C)`;
//! - twist: `MHC_y(L^k b) = u^k MHC_y(b)` with `u = -y` (naive) or `u = y`
//!   (shifted).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;
use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genus::{chi_y_genus, lambda_y_character, BuiltinSpace, GenusError};
use crate::kgroup::{
    basis_multi_indices, character_to_basis, IntCombo, KClass, KError, KPresentation,
};
use crate::laurent::Laurent;
use crate::scalar::{Coefficient, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MotivicError {
    #[error("unknown variety generator `{0}`")]
    UnknownGenerator(String),
    #[error("duplicate variety generator `{0}`")]
    DuplicateGenerator(String),
    #[error("generator `{name}` needs {expected} pushforward images, found {found}")]
    ImageShape {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("generator `{0}` has a zero-dimensional projective factor")]
    DegenerateFactor(String),
    #[error("classes live over different bases (`{0}` vs `{1}`)")]
    BaseMismatch(String, String),
    #[error("`{boundary}` is not contained in `{closure}`")]
    NotSupported { closure: String, boundary: String },
    #[error("cannot parse motivic class `{0}`")]
    Parse(String),
    #[error(transparent)]
    Genus(#[from] GenusError),
    #[error(transparent)]
    K(#[from] KError),
}

/// Multiplier of `L` under `MHC_y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TwistRule {
    /// `L -> -y`.
    Naive,
    /// `L -> +y`.
    Shifted,
}

impl TwistRule {
    pub const ALL: [TwistRule; 2] = [TwistRule::Naive, TwistRule::Shifted];

    pub fn multiplier<S: Scalar>(self) -> Laurent<S> {
        match self {
            TwistRule::Naive => -Laurent::y(),
            TwistRule::Shifted => Laurent::y(),
        }
    }

    pub fn other(self) -> Self {
        match self {
            TwistRule::Naive => TwistRule::Shifted,
            TwistRule::Shifted => TwistRule::Naive,
        }
    }
}

impl fmt::Display for TwistRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TwistRule::Naive => "naive",
            TwistRule::Shifted => "shifted",
        })
    }
}

impl FromStr for TwistRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "naive" => Ok(TwistRule::Naive),
            "shifted" => Ok(TwistRule::Shifted),
            other => Err(format!(
                "unknown twist rule `{other}` (expected naive or shifted)"
            )),
        }
    }
}

/// `C x A^d -> X` with `C = P^n1 x ... x P^nk`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarietyGenerator {
    pub name: String,
    pub compact_factors: Vec<u32>,
    pub affine_dim: u32,
    /// Image in the base of each `[O_L]`, in the order of `basis_multi_indices`.
    pub images: Vec<IntCombo>,
    /// Generators whose image lies inside this one.
    pub within: BTreeSet<String>,
}

impl VarietyGenerator {
    pub fn space(&self) -> BuiltinSpace {
        BuiltinSpace::product(&self.compact_factors)
    }

    pub fn dimension(&self) -> u32 {
        self.compact_factors.iter().sum::<u32>() + self.affine_dim
    }

    pub fn is_compact(&self) -> bool {
        self.affine_dim == 0
    }

    /// Topological Euler characteristic `prod (n_i + 1)`.
    pub fn euler(&self) -> i64 {
        self.compact_factors
            .iter()
            .map(|n| i64::from(*n) + 1)
            .product()
    }
}

/// Generators over a common base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Registry {
    base: Arc<KPresentation>,
    generators: Vec<VarietyGenerator>,
}

impl Registry {
    pub fn new(base: Arc<KPresentation>) -> Self {
        Registry {
            base,
            generators: Vec::new(),
        }
    }

    pub fn add(&mut self, g: VarietyGenerator) -> Result<usize, MotivicError> {
        if self.generators.iter().any(|h| h.name == g.name) {
            return Err(MotivicError::DuplicateGenerator(g.name));
        }
        if g.compact_factors.contains(&0) {
            return Err(MotivicError::DegenerateFactor(g.name));
        }
        let expected = basis_multi_indices(&g.compact_factors).len();
        if g.images.len() != expected {
            return Err(MotivicError::ImageShape {
                name: g.name,
                expected,
                found: g.images.len(),
            });
        }
        let n = self.base.generators().len();
        for image in &g.images {
            if let Some(k) = image.keys().find(|k| **k >= n) {
                return Err(KError::UnknownGenerator {
                    presentation: self.base.name().into(),
                    name: format!("#{k}"),
                }
                .into());
            }
        }
        self.generators.push(g);
        Ok(self.generators.len() - 1)
    }

    pub fn base(&self) -> &Arc<KPresentation> {
        &self.base
    }

    pub fn generators(&self) -> &[VarietyGenerator] {
        &self.generators
    }

    pub fn index(&self, name: &str) -> Result<usize, MotivicError> {
        self.generators
            .iter()
            .position(|g| g.name == name)
            .ok_or_else(|| MotivicError::UnknownGenerator(name.into()))
    }

    pub fn get(&self, name: &str) -> Result<&VarietyGenerator, MotivicError> {
        Ok(&self.generators[self.index(name)?])
    }

    /// `MHC_y` of a single generator (rule R1).
    pub fn evaluate<S: Scalar>(&self, index: usize) -> Result<KClass<S>, MotivicError> {
        let g = &self.generators[index];
        let space = g.space();
        let ring = space.presentation::<S>();
        let lambda = lambda_y_character(&space.cotangent_bundle(&ring))?;
        let coords = character_to_basis(space.factors(), &lambda);
        let affine = Laurent::one_plus_y().pow(g.affine_dim);
        let mut terms = Vec::new();
        for (c, image) in coords.iter().zip(&g.images) {
            let c = c * &affine;
            for (&k, &m) in image {
                terms.push((k, c.scale(&S::from_ratio(m, 1))));
            }
        }
        Ok(KClass::from_terms(&self.base, terms))
    }
}

/// Key of a term: generator index and power of `L`.
pub type TermKey = (usize, u32);

/// Finite `Z[L]`-combination of generators of one registry.
#[derive(Clone, PartialEq, Eq)]
pub struct MotivicClass {
    registry: Arc<Registry>,
    terms: BTreeMap<TermKey, i64>,
}

fn accumulate(map: &mut BTreeMap<TermKey, i64>, k: TermKey, v: i64) {
    let e = map.entry(k).or_insert(0);
    *e += v;
    if *e == 0 {
        map.remove(&k);
    }
}

impl MotivicClass {
    pub fn zero(registry: &Arc<Registry>) -> Self {
        MotivicClass {
            registry: registry.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn generator(registry: &Arc<Registry>, index: usize) -> Self {
        Self::from_terms(registry, [((index, 0), 1)])
    }

    pub fn named(registry: &Arc<Registry>, name: &str) -> Result<Self, MotivicError> {
        Ok(Self::generator(registry, registry.index(name)?))
    }

    pub fn from_terms<I: IntoIterator<Item = (TermKey, i64)>>(
        registry: &Arc<Registry>,
        terms: I,
    ) -> Self {
        let mut map = BTreeMap::new();
        for (k, v) in terms {
            accumulate(&mut map, k, v);
        }
        MotivicClass {
            registry: registry.clone(),
            terms: map,
        }
    }

    pub fn registry(&self) -> &Arc<Registry> {
        &self.registry
    }

    pub fn base(&self) -> &Arc<KPresentation> {
        &self.registry.base
    }

    pub fn terms(&self) -> impl Iterator<Item = (TermKey, i64)> + '_ {
        self.terms.iter().map(|(k, v)| (*k, *v))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn same(&self, other: &Self) -> Result<(), MotivicError> {
        if Arc::ptr_eq(&self.registry, &other.registry) || *self.registry == *other.registry {
            Ok(())
        } else {
            Err(MotivicError::BaseMismatch(
                self.base().name().into(),
                other.base().name().into(),
            ))
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, MotivicError> {
        self.same(other)?;
        let mut terms = self.terms.clone();
        for (k, v) in &other.terms {
            accumulate(&mut terms, *k, *v);
        }
        Ok(MotivicClass {
            registry: self.registry.clone(),
            terms,
        })
    }

    pub fn scale(&self, c: i64) -> Self {
        Self::from_terms(&self.registry, self.terms.iter().map(|(k, v)| (*k, v * c)))
    }

    /// Multiply by `L^k`.
    pub fn times_l(&self, k: u32) -> Self {
        Self::from_terms(
            &self.registry,
            self.terms.iter().map(|((g, e), v)| ((*g, e + k), *v)),
        )
    }

    /// Multiply by `(1 - L)^k`.
    pub fn times_one_minus_l(&self, k: u32) -> Self {
        let mut out = self.clone();
        for _ in 0..k {
            out = &out - &out.times_l(1);
        }
        out
    }

    /// `[U] = [closure] - [boundary]`; the boundary must lie in the closure.
    pub fn expand_open_stratum(
        registry: &Arc<Registry>,
        closure: usize,
        boundary: &MotivicClass,
    ) -> Result<Self, MotivicError> {
        let c = &registry.generators[closure];
        for ((g, _), _) in boundary.terms() {
            let name = &boundary.registry.generators[g].name;
            if !c.within.contains(name) {
                return Err(MotivicError::NotSupported {
                    closure: c.name.clone(),
                    boundary: name.clone(),
                });
            }
        }
        Self::generator(registry, closure).checked_add(&-boundary)
    }

    /// `MHC_y` into `target`, which must be the base of the class.
    pub fn mhc_y<S: Scalar>(
        &self,
        target: &Arc<KPresentation>,
        rule: TwistRule,
    ) -> Result<KClass<S>, MotivicError> {
        if **target != *self.registry.base {
            return Err(MotivicError::BaseMismatch(
                self.base().name().into(),
                target.name().into(),
            ));
        }
        let u = rule.multiplier::<S>();
        let mut cache: BTreeMap<usize, KClass<S>> = BTreeMap::new();
        let mut out = KClass::zero(target);
        for ((g, e), v) in self.terms() {
            let base = match cache.entry(g) {
                std::collections::btree_map::Entry::Occupied(o) => o.into_mut(),
                std::collections::btree_map::Entry::Vacant(slot) => {
                    slot.insert(self.registry.evaluate(g)?)
                }
            };
            let factor = u.pow(e).scale(&S::from_ratio(v, 1));
            out = &out + &base.scale(&factor);
        }
        Ok(out)
    }

    /// `chi_y`: `[C x A^d] -> chi_y(C) (-y)^d`, `L -> -y`.
    pub fn chi_y_of<S: Scalar>(&self) -> Laurent<S> {
        let minus_y = -Laurent::<S>::y();
        let mut out = Laurent::zero();
        for ((g, e), v) in self.terms() {
            let gen = &self.registry.generators[g];
            let term = &chi_y_genus::<S>(&gen.space()) * &minus_y.pow(gen.affine_dim + e);
            out = &out + &term.scale(&S::from_ratio(v, 1));
        }
        out
    }

    /// Topological Euler characteristic: `[Z] -> chi(Z)`, `L -> 1`.
    pub fn euler_of(&self) -> i64 {
        self.terms()
            .map(|((g, _), v)| v * self.registry.generators[g].euler())
            .sum()
    }

    /// Replace every `L^k [Z]` by `sum_j C(k,j) (-1)^{k-j} [(P^1)^j x Z]`,
    /// adding the compactified generators to a copy of the registry.
    pub fn compactify_twists(&self) -> Result<MotivicClass, MotivicError> {
        let mut reg = (*self.registry).clone();
        let mut terms: Vec<(TermKey, i64)> = Vec::new();
        for ((g, e), v) in self.terms() {
            for j in 0..=e {
                let sign = if (e - j) % 2 == 0 { 1 } else { -1 };
                let coeff = v * sign * binomial(e, j);
                let idx = if j == 0 {
                    g
                } else {
                    ensure_p1_power(&mut reg, g, j)?
                };
                terms.push(((idx, 0), coeff));
            }
        }
        Ok(MotivicClass::from_terms(&Arc::new(reg), terms))
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, ((g, e), v)) in self.terms().enumerate() {
            let name = &self.registry.generators[g].name;
            let mag = v.abs();
            let sign = if v < 0 { "-" } else { "+" };
            if i == 0 {
                if v < 0 {
                    out.push('-');
                }
            } else {
                out.push_str(&format!(" {sign} "));
            }
            let mut factors = Vec::new();
            if mag != 1 {
                factors.push(mag.to_string());
            }
            match e {
                0 => {}
                1 => factors.push("L".into()),
                _ => factors.push(format!("L^{e}")),
            }
            factors.push(format!("[{name}]"));
            out.push_str(&factors.join("*"));
        }
        out
    }

    /// Parse `"[E1] - 2*L*[pt] + L^2*[pt]"` against a registry.
    pub fn parse(registry: &Arc<Registry>, text: &str) -> Result<Self, MotivicError> {
        let err = || MotivicError::Parse(text.to_string());
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact == "0" {
            return Ok(Self::zero(registry));
        }
        if compact.is_empty() {
            return Err(err());
        }
        let mut terms = Vec::new();
        let mut rest = compact.as_str();
        let mut first = true;
        while !rest.is_empty() {
            let (sign, body) = match rest.as_bytes()[0] {
                b'+' if !first => (1, &rest[1..]),
                b'-' => (-1, &rest[1..]),
                _ if first => (1, rest),
                _ => return Err(err()),
            };
            first = false;
            let end = body.find(']').ok_or_else(err)? + 1;
            let (term, tail) = body.split_at(end);
            rest = tail;
            let mut coeff = 1i64;
            let mut power = 0u32;
            let mut name = None;
            for factor in term.split('*') {
                if let Some(inner) = factor.strip_prefix('[').and_then(|f| f.strip_suffix(']')) {
                    name = Some(inner.to_string());
                } else if factor == "L" {
                    power += 1;
                } else if let Some(p) = factor.strip_prefix("L^") {
                    power += p.parse::<u32>().map_err(|_| err())?;
                } else {
                    coeff *= factor.parse::<i64>().map_err(|_| err())?;
                }
            }
            let name = name.ok_or_else(err)?;
            terms.push(((registry.index(&name)?, power), sign * coeff));
        }
        Ok(Self::from_terms(registry, terms))
    }
}

fn binomial(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * i64::from(n - i) / i64::from(i + 1))
}

/// Index of `(P^1)^j x Z` in `reg`, adding it when absent. Its pushforward
/// factors through `Z`, and `chi(P^1, O) = chi(pt, O) = 1`, so both basis
/// elements of each `P^1` factor map to the image of the `Z`-part.
fn ensure_p1_power(reg: &mut Registry, g: usize, j: u32) -> Result<usize, MotivicError> {
    let base = reg.generators[g].clone();
    let name = format!("(P1)^{j}x{}", base.name);
    if let Ok(i) = reg.index(&name) {
        return Ok(i);
    }
    let mut factors = vec![1; j as usize];
    factors.extend(&base.compact_factors);
    let base_basis = basis_multi_indices(&base.compact_factors);
    let images = basis_multi_indices(&factors)
        .iter()
        .map(|c| {
            let tail = &c[j as usize..];
            let k = base_basis
                .iter()
                .position(|b| b == tail)
                .expect("tail is a basis index");
            base.images[k].clone()
        })
        .collect();
    let gen = VarietyGenerator {
        name,
        compact_factors: factors,
        affine_dim: base.affine_dim,
        images,
        within: BTreeSet::new(),
    };
    reg.add(gen)
}

impl fmt::Display for MotivicClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for MotivicClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MotivicClass[{}]({})", self.base().name(), self.render())
    }
}

impl Add<&MotivicClass> for &MotivicClass {
    type Output = MotivicClass;

    fn add(self, rhs: &MotivicClass) -> MotivicClass {
        self.checked_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Sub<&MotivicClass> for &MotivicClass {
    type Output = MotivicClass;

    fn sub(self, rhs: &MotivicClass) -> MotivicClass {
        self.checked_add(&-rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Neg for &MotivicClass {
    type Output = MotivicClass;

    fn neg(self) -> MotivicClass {
        self.scale(-1)
    }
}

/// Single-generator registry over the point: `[P^n1 x ... x A^d -> pt]`.
pub fn point_registry(spaces: &[(&str, Vec<u32>, u32)]) -> Result<Arc<Registry>, MotivicError> {
    let pt = Arc::new(KPresentation::point());
    let mut reg = Registry::new(pt);
    for (name, factors, affine) in spaces {
        let images = basis_multi_indices(factors)
            .iter()
            .map(|_| IntCombo::from([(0, 1)]))
            .collect();
        reg.add(VarietyGenerator {
            name: name.to_string(),
            compact_factors: factors.clone(),
            affine_dim: *affine,
            images,
            within: BTreeSet::new(),
        })?;
    }
    Ok(Arc::new(reg))
}

/// Evaluate `chi_y` through `MHC_y` over the point for compact classes.
pub fn chi_y_via_point<S: Scalar>(m: &MotivicClass) -> Result<Laurent<S>, MotivicError> {
    let k: KClass<S> = m.mhc_y(m.base(), TwistRule::Naive)?;
    Ok(k.point_pairing())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kgroup::{Arrangement, ProductFamily};
    use crate::Rational;
    use proptest::prelude::*;

    type L = Laurent<Rational>;

    fn lp(s: &str) -> L {
        s.parse().unwrap()
    }

    fn spaces() -> Arc<Registry> {
        point_registry(&[
            ("pt", vec![], 0),
            ("P1", vec![1], 0),
            ("P2", vec![2], 0),
            ("A1", vec![], 1),
            ("P1xP1", vec![1, 1], 0),
            ("P1xA2", vec![1], 2),
        ])
        .unwrap()
    }

    /// Motivic registry over the node `xy = 0` with strata E1, E2, pt.
    fn node() -> (Arrangement, Arc<Registry>) {
        let arr = Arrangement::new(&[1, 1]).unwrap();
        let mut reg = Registry::new(arr.fiber.clone());
        for (name, dim, within) in [
            ("E1", 1, vec!["pt"]),
            ("E2", 1, vec!["pt"]),
            ("pt", 0, vec![]),
        ] {
            let idx = arr.fiber.generator_index(name).unwrap();
            reg.add(VarietyGenerator {
                name: name.into(),
                compact_factors: vec![],
                affine_dim: dim,
                images: vec![IntCombo::from([(idx, 1)])],
                within: within.into_iter().map(String::from).collect(),
            })
            .unwrap();
        }
        (arr, Arc::new(reg))
    }

    #[test]
    fn point_maps_to_o_pt() {
        let (arr, reg) = node();
        let k: KClass<Rational> = MotivicClass::named(&reg, "pt")
            .unwrap()
            .mhc_y(&arr.fiber, TwistRule::Naive)
            .unwrap();
        assert_eq!(k, KClass::named(&arr.fiber, "pt").unwrap());
    }

    #[test]
    fn affine_space_gets_trivial_lambda_factor() {
        let (arr, reg) = node();
        let k: KClass<Rational> = MotivicClass::named(&reg, "E1")
            .unwrap()
            .mhc_y(&arr.fiber, TwistRule::Naive)
            .unwrap();
        assert_eq!(
            k,
            KClass::named(&arr.fiber, "E1").unwrap().scale(&lp("1 + y"))
        );
        let a2 = point_registry(&[("A2", vec![], 2)]).unwrap();
        let k: KClass<Rational> = MotivicClass::named(&a2, "A2")
            .unwrap()
            .mhc_y(a2.base(), TwistRule::Naive)
            .unwrap();
        assert_eq!(k.coeff(0), lp("1 + 2*y + y^2"));
    }

    #[test]
    fn twist_multipliers() {
        let (arr, reg) = node();
        let lpt = MotivicClass::named(&reg, "pt").unwrap().times_l(1);
        let opt = KClass::<Rational>::named(&arr.fiber, "pt").unwrap();
        assert_eq!(
            lpt.mhc_y::<Rational>(&arr.fiber, TwistRule::Naive).unwrap(),
            opt.scale(&lp("-y"))
        );
        assert_eq!(
            lpt.mhc_y::<Rational>(&arr.fiber, TwistRule::Shifted)
                .unwrap(),
            opt.scale(&lp("y"))
        );
    }

    #[test]
    fn chi_y_values() {
        let reg = spaces();
        let c = |s: &str| MotivicClass::parse(&reg, s).unwrap().chi_y_of::<Rational>();
        assert_eq!(c("[P1]"), lp("1 - y"));
        assert_eq!(c("L*[pt]"), lp("-y"));
        // Gm = A1 - pt, with the oracle P1 - 2 pt
        assert_eq!(c("[A1] - [pt]"), lp("-1 - y"));
        assert_eq!(c("[P1] - 2*[pt]"), lp("-1 - y"));
        assert_eq!(c("[P1xA2]"), lp("y^2 - y^3"));
    }

    #[test]
    fn chi_y_agrees_with_mhc_over_point_on_compact_classes() {
        let reg = spaces();
        for s in ["[P1]", "[P2] - 3*[pt]", "[P1xP1] + 2*L*[P1]", "L^2*[pt]"] {
            let m = MotivicClass::parse(&reg, s).unwrap();
            assert_eq!(
                chi_y_via_point::<Rational>(&m).unwrap(),
                m.chi_y_of::<Rational>(),
                "{s}"
            );
        }
    }

    #[test]
    fn euler_values() {
        let reg = spaces();
        let e = |s: &str| MotivicClass::parse(&reg, s).unwrap().euler_of();
        assert_eq!(e("[A1]"), 1);
        assert_eq!(e("[A1] - [pt]"), 0);
        assert_eq!(e("[pt] - L*[pt]"), 0);
        assert_eq!(e("[P2]"), 3);
        assert_eq!(e("[P1xP1]"), 4);
    }

    #[test]
    fn euler_agrees_with_chi_y_at_minus_one() {
        let reg = spaces();
        for s in [
            "[P1]",
            "[A1] - [pt]",
            "[P1xA2] - 3*L^2*[P2]",
            "[pt] - L*[pt]",
        ] {
            let m = MotivicClass::parse(&reg, s).unwrap();
            let v = m
                .chi_y_of::<Rational>()
                .eval_at(&Rational::from_ratio(-1, 1))
                .unwrap();
            assert_eq!(v, Rational::from_ratio(m.euler_of(), 1), "{s}");
        }
    }

    #[test]
    fn open_strata_and_additivity() {
        let (arr, reg) = node();
        let pt = MotivicClass::named(&reg, "pt").unwrap();
        let e1 = reg.index("E1").unwrap();
        let open = MotivicClass::expand_open_stratum(&reg, e1, &pt).unwrap();
        assert_eq!(open.render(), "[E1] - [pt]");
        let k = |m: &MotivicClass| m.mhc_y::<Rational>(&arr.fiber, TwistRule::Naive).unwrap();
        assert_eq!(k(&MotivicClass::generator(&reg, e1)), &k(&open) + &k(&pt));
        // E_12 of the node: nothing to remove
        let closed = MotivicClass::expand_open_stratum(
            &reg,
            reg.index("pt").unwrap(),
            &MotivicClass::zero(&reg),
        )
        .unwrap();
        assert_eq!(closed, pt);
        let e2 = MotivicClass::named(&reg, "E2").unwrap();
        assert!(MotivicClass::expand_open_stratum(&reg, e1, &e2).is_err());
    }

    #[test]
    fn gm_over_itself() {
        let reg = spaces();
        let gm = MotivicClass::expand_open_stratum(
            &reg,
            reg.index("A1").unwrap(),
            &MotivicClass::zero(&reg),
        )
        .unwrap();
        let gm = &gm - &MotivicClass::named(&reg, "pt").unwrap();
        assert_eq!(gm.render(), "-[pt] + [A1]");
        assert_eq!(gm.euler_of(), 0);
    }

    #[test]
    fn render_parse_round_trip() {
        let reg = spaces();
        for s in [
            "[pt]",
            "-2*L^3*[P1] + [A1]",
            "0",
            "[pt] - L*[pt] + L^2*[P2]",
        ] {
            let m = MotivicClass::parse(&reg, s).unwrap();
            assert_eq!(MotivicClass::parse(&reg, &m.render()).unwrap(), m);
        }
        assert!(MotivicClass::parse(&reg, "[nope]").is_err());
        assert!(MotivicClass::parse(&reg, "2*").is_err());
    }

    #[test]
    fn projective_line_pushes_to_one_minus_y_over_point() {
        let reg = spaces();
        let k: KClass<Rational> = MotivicClass::named(&reg, "P1")
            .unwrap()
            .mhc_y(reg.base(), TwistRule::Naive)
            .unwrap();
        assert_eq!(k.coeff(0), lp("1 - y"));
    }

    #[test]
    fn product_family_identity_class() {
        let fam = ProductFamily::new(&[1]).unwrap();
        let mut reg = Registry::new(fam.fiber.clone());
        reg.add(VarietyGenerator {
            name: "P1".into(),
            compact_factors: vec![1],
            affine_dim: 0,
            images: vec![IntCombo::from([(0, 1)]), IntCombo::from([(1, 1)])],
            within: BTreeSet::new(),
        })
        .unwrap();
        let reg = Arc::new(reg);
        let k: KClass<Rational> = MotivicClass::named(&reg, "P1")
            .unwrap()
            .mhc_y(&fam.fiber, TwistRule::Naive)
            .unwrap();
        assert_eq!(k.coeff_of("L1").unwrap(), lp("1 + y"));
        assert_eq!(k.coeff_of("L0").unwrap(), lp("-2*y"));
    }

    #[test]
    fn twist_rule_matches_compactified_decomposition() {
        let (arr, reg) = node();
        for s in ["L*[pt]", "L^2*[E1]", "3*L^3*[E2] - L*[pt]"] {
            let m = MotivicClass::parse(&reg, s).unwrap();
            let oracle = m.compactify_twists().unwrap();
            assert!(oracle.terms().all(|((_, e), _)| e == 0));
            let direct: KClass<Rational> = m.mhc_y(&arr.fiber, TwistRule::Naive).unwrap();
            assert_eq!(
                oracle
                    .mhc_y::<Rational>(&arr.fiber, TwistRule::Naive)
                    .unwrap(),
                direct,
                "{s}"
            );
        }
    }

    #[test]
    fn image_shape_is_checked() {
        let mut reg = Registry::new(Arc::new(KPresentation::point()));
        let err = reg
            .add(VarietyGenerator {
                name: "P1".into(),
                compact_factors: vec![1],
                affine_dim: 0,
                images: vec![IntCombo::from([(0, 1)])],
                within: BTreeSet::new(),
            })
            .unwrap_err();
        assert!(matches!(
            err,
            MotivicError::ImageShape {
                expected: 2,
                found: 1,
                ..
            }
        ));
    }

    proptest! {
        #[test]
        fn euler_and_chi_y_are_additive(a in prop::collection::vec((0usize..6, 0u32..3, -3i64..=3), 0..5),
                                        b in prop::collection::vec((0usize..6, 0u32..3, -3i64..=3), 0..5)) {
            let reg = spaces();
            let ma = MotivicClass::from_terms(&reg, a.into_iter().map(|(g, e, v)| ((g, e), v)));
            let mb = MotivicClass::from_terms(&reg, b.into_iter().map(|(g, e, v)| ((g, e), v)));
            let s = &ma + &mb;
            prop_assert_eq!(s.euler_of(), ma.euler_of() + mb.euler_of());
            prop_assert_eq!(s.chi_y_of::<Rational>(), &ma.chi_y_of::<Rational>() + &mb.chi_y_of::<Rational>());
            let at = s.chi_y_of::<Rational>().eval_at(&Rational::from_ratio(-1, 1)).unwrap();
            prop_assert_eq!(at, Rational::from_ratio(s.euler_of(), 1));
        }
    }
}
