//! Presented Grothendieck groups of coherent sheaves with coefficients in
//! `Q[y, y^-1]`.
//!
//! Generators are structure sheaves `[O_V]` of closed strata. Relations are
//! integer combinations; each one eliminates the first-declared generator it
//! involves, whose coefficient must be a unit. Normal forms are combinations
//! of the surviving (free) generators.
//!
//! Built-in presentations:
//! - the point;
//! - coordinate-subspace arrangements `{x^a = 0}` in affine space, with one
//!   generator per union level of the fiber and one per coordinate stratum;
//! - products of projective spaces, with the basis `[O_L]` of products of
//!   linear subspaces (a genuine basis of `K(P^n1 x ... x P^nk)`);
//! - products `M x A^1` with the fiber `M x 0`.
//!
//! The built-in relation sets are sound: two classes with the same normal
//! form are equal in the geometric group. Classes supported in codimension
//! may still vanish geometrically without vanishing here.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::laurent::{Laurent, LaurentError};
use crate::ring::{GradedClass, RingPresentation};
use crate::scalar::{Coefficient, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KError {
    #[error("unknown generator `{name}` in presentation `{presentation}`")]
    UnknownGenerator { presentation: String, name: String },
    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),
    #[error("K-classes live in different presentations (`{0}` vs `{1}`)")]
    PresentationMismatch(String, String),
    #[error("relation {index} has leading coefficient {coeff} on `{lead}`; leads must be 1 or -1")]
    NonUnitLead {
        index: usize,
        lead: String,
        coeff: i64,
    },
    #[error("Gysin table for `{source_pres}` has no entry for `{generator}`")]
    MissingGysinEntry {
        source_pres: String,
        generator: String,
    },
    #[error("Gysin table does not respect relation {index} of `{source_pres}`")]
    GysinRelation { source_pres: String, index: usize },
    #[error("Gysin image of `{0}` must vanish: the generator is supported in the fiber")]
    GysinFiber(String),
    #[error("normal form depends on reduction strategy: {0}")]
    Confluence(String),
    #[error("cannot build arrangement: {0}")]
    Arrangement(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KGenerator {
    pub name: String,
    pub dim: u32,
    /// Value of the degree functional on `[O_V]` in normal-form coordinates:
    /// `chi(V, O_V)` for compact strata, 0 for non-compact ones.
    pub point_degree: i64,
}

impl KGenerator {
    pub fn new(name: impl Into<String>, dim: u32, point_degree: i64) -> Self {
        KGenerator {
            name: name.into(),
            dim,
            point_degree,
        }
    }
}

/// Integer combination of generators, by index.
pub type IntCombo = BTreeMap<usize, i64>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KPresentation {
    name: String,
    generators: Vec<KGenerator>,
    relations: Vec<IntCombo>,
    /// Echelon rows `lead -> combination of later generators`, before back-substitution.
    echelon: Vec<(usize, IntCombo)>,
    /// Fully reduced substitution for each eliminated generator.
    substitution: Vec<Option<IntCombo>>,
    builtin: bool,
}

fn accumulate(map: &mut IntCombo, k: usize, v: i64) {
    let e = map.entry(k).or_insert(0);
    *e += v;
    if *e == 0 {
        map.remove(&k);
    }
}

impl KPresentation {
    /// A user-declared presentation.
    pub fn new(
        name: impl Into<String>,
        generators: Vec<KGenerator>,
        relations: Vec<IntCombo>,
    ) -> Result<Self, KError> {
        Self::build(name.into(), generators, relations, false)
    }

    /// Like [`KPresentation::new`] with relations given by generator names.
    pub fn from_named(
        name: impl Into<String>,
        generators: Vec<KGenerator>,
        relations: &[Vec<(String, i64)>],
    ) -> Result<Self, KError> {
        let name = name.into();
        let index: BTreeMap<&str, usize> = generators
            .iter()
            .enumerate()
            .map(|(i, g)| (g.name.as_str(), i))
            .collect();
        let mut rels = Vec::new();
        for r in relations {
            let mut combo = IntCombo::new();
            for (g, c) in r {
                let i = *index
                    .get(g.as_str())
                    .ok_or_else(|| KError::UnknownGenerator {
                        presentation: name.clone(),
                        name: g.clone(),
                    })?;
                accumulate(&mut combo, i, *c);
            }
            rels.push(combo);
        }
        Self::new(name, generators, rels)
    }

    fn build(
        name: String,
        generators: Vec<KGenerator>,
        relations: Vec<IntCombo>,
        builtin: bool,
    ) -> Result<Self, KError> {
        let mut seen = BTreeSet::new();
        for g in &generators {
            if !seen.insert(g.name.as_str()) {
                return Err(KError::DuplicateGenerator(g.name.clone()));
            }
        }
        let n = generators.len();
        for r in &relations {
            if let Some(&i) = r.keys().find(|&&i| i >= n) {
                return Err(KError::UnknownGenerator {
                    presentation: name,
                    name: format!("#{i}"),
                });
            }
        }
        let mut substitution: Vec<Option<IntCombo>> = vec![None; n];
        let mut echelon = Vec::new();
        for (index, rel) in relations.iter().enumerate() {
            let row = substitute(&substitution, rel);
            let Some((&lead, &coeff)) = row.iter().next() else {
                continue;
            };
            if coeff.abs() != 1 {
                return Err(KError::NonUnitLead {
                    index,
                    lead: generators[lead].name.clone(),
                    coeff,
                });
            }
            // coeff * g_lead + rest = 0  =>  g_lead = -coeff * rest
            let rule: IntCombo = row.iter().skip(1).map(|(&k, &v)| (k, -coeff * v)).collect();
            for s in substitution.iter_mut().flatten() {
                if let Some(c) = s.remove(&lead) {
                    for (&k, &v) in &rule {
                        accumulate(s, k, c * v);
                    }
                }
            }
            echelon.push((lead, rule.clone()));
            substitution[lead] = Some(rule);
        }
        Ok(KPresentation {
            name,
            generators,
            relations,
            echelon,
            substitution,
            builtin,
        })
    }

    pub fn point() -> Self {
        Self::build("pt".into(), vec![KGenerator::new("pt", 0, 1)], vec![], true)
            .expect("point presentation")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn generators(&self) -> &[KGenerator] {
        &self.generators
    }

    pub fn relations(&self) -> &[IntCombo] {
        &self.relations
    }

    pub fn is_builtin(&self) -> bool {
        self.builtin
    }

    pub fn generator_index(&self, name: &str) -> Result<usize, KError> {
        self.generators
            .iter()
            .position(|g| g.name == name)
            .ok_or_else(|| KError::UnknownGenerator {
                presentation: self.name.clone(),
                name: name.into(),
            })
    }

    /// Generators that survive in normal forms.
    pub fn free_generators(&self) -> Vec<usize> {
        (0..self.generators.len())
            .filter(|i| self.substitution[*i].is_none())
            .collect()
    }

    pub fn normalize(&self, combo: &IntCombo) -> IntCombo {
        substitute(&self.substitution, combo)
    }

    /// Rewrite with the echelon rows in random order until no eliminated
    /// generator remains.
    pub fn normalize_by_rewriting(&self, combo: &IntCombo, rng: &mut StdRng) -> IntCombo {
        let mut cur = combo.clone();
        loop {
            let redexes: Vec<usize> = (0..self.echelon.len())
                .filter(|r| cur.contains_key(&self.echelon[*r].0))
                .collect();
            if redexes.is_empty() {
                return cur;
            }
            let (lead, rule) = &self.echelon[redexes[rng.gen_range(0..redexes.len())]];
            let c = cur.remove(lead).expect("redex present");
            for (&k, &v) in rule {
                accumulate(&mut cur, k, c * v);
            }
        }
    }

    /// Compare substitution and random rewriting on random elements.
    pub fn check_normal_forms(&self, trials: usize, seed: u64) -> Result<(), KError> {
        let n = self.generators.len();
        if n == 0 {
            return Ok(());
        }
        let mut rng = StdRng::seed_from_u64(seed);
        for _ in 0..trials {
            let mut combo = IntCombo::new();
            for _ in 0..rng.gen_range(1..=4) {
                accumulate(&mut combo, rng.gen_range(0..n), rng.gen_range(-5..=5));
            }
            let a = self.normalize(&combo);
            let b = self.normalize_by_rewriting(&combo, &mut rng);
            if a != b || self.normalize(&a) != a {
                return Err(KError::Confluence(format!("{} on {:?}", self.name, combo)));
            }
        }
        for (i, rel) in self.relations.iter().enumerate() {
            if !self.normalize(rel).is_empty() {
                return Err(KError::Confluence(format!(
                    "relation {i} of {} does not reduce to zero",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

fn substitute(substitution: &[Option<IntCombo>], combo: &IntCombo) -> IntCombo {
    let mut out = IntCombo::new();
    for (&g, &c) in combo {
        match &substitution[g] {
            Some(rule) => {
                for (&k, &v) in rule {
                    accumulate(&mut out, k, c * v);
                }
            }
            None => accumulate(&mut out, g, c),
        }
    }
    out
}

/// Element of a presented group with Laurent coefficients, in normal form.
#[derive(Clone, PartialEq)]
pub struct KClass<S: Scalar> {
    pres: Arc<KPresentation>,
    coeffs: BTreeMap<usize, Laurent<S>>,
}

impl<S: Scalar> KClass<S> {
    pub fn zero(pres: &Arc<KPresentation>) -> Self {
        KClass {
            pres: pres.clone(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn generator(pres: &Arc<KPresentation>, index: usize) -> Self {
        Self::from_terms(pres, [(index, Laurent::one())])
    }

    pub fn named(pres: &Arc<KPresentation>, name: &str) -> Result<Self, KError> {
        Ok(Self::generator(pres, pres.generator_index(name)?))
    }

    pub fn from_int(pres: &Arc<KPresentation>, combo: &IntCombo) -> Self {
        Self::from_terms(pres, combo.iter().map(|(&g, &c)| (g, Laurent::from_i64(c))))
    }

    pub fn from_terms<I: IntoIterator<Item = (usize, Laurent<S>)>>(
        pres: &Arc<KPresentation>,
        terms: I,
    ) -> Self {
        let mut coeffs: BTreeMap<usize, Laurent<S>> = BTreeMap::new();
        for (g, c) in terms {
            let unit = IntCombo::from([(g, 1)]);
            for (k, v) in pres.normalize(&unit) {
                add_coeff(&mut coeffs, k, c.scale(&S::from_ratio(v, 1)));
            }
        }
        KClass {
            pres: pres.clone(),
            coeffs,
        }
    }

    pub fn presentation(&self) -> &Arc<KPresentation> {
        &self.pres
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &Laurent<S>)> {
        self.coeffs.iter().map(|(k, v)| (*k, v))
    }

    pub fn coeff(&self, index: usize) -> Laurent<S> {
        self.coeffs
            .get(&index)
            .cloned()
            .unwrap_or_else(Laurent::zero)
    }

    pub fn coeff_of(&self, name: &str) -> Result<Laurent<S>, KError> {
        Ok(self.coeff(self.pres.generator_index(name)?))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn same(&self, other: &Self) -> Result<(), KError> {
        if Arc::ptr_eq(&self.pres, &other.pres) || *self.pres == *other.pres {
            Ok(())
        } else {
            Err(KError::PresentationMismatch(
                self.pres.name.clone(),
                other.pres.name.clone(),
            ))
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, KError> {
        self.same(other)?;
        let mut coeffs = self.coeffs.clone();
        for (k, v) in &other.coeffs {
            add_coeff(&mut coeffs, *k, v.clone());
        }
        Ok(KClass {
            pres: self.pres.clone(),
            coeffs,
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, KError> {
        self.checked_add(&-other)
    }

    pub fn scale(&self, c: &Laurent<S>) -> Self {
        let mut coeffs = BTreeMap::new();
        for (k, v) in &self.coeffs {
            add_coeff(&mut coeffs, *k, v * c);
        }
        KClass {
            pres: self.pres.clone(),
            coeffs,
        }
    }

    pub fn divide_by_one_plus_y(&self) -> Result<Self, LaurentError> {
        let mut coeffs = BTreeMap::new();
        for (k, v) in &self.coeffs {
            coeffs.insert(*k, v.divide_by_one_plus_y()?);
        }
        Ok(KClass {
            pres: self.pres.clone(),
            coeffs,
        })
    }

    pub fn is_divisible_by_one_plus_y(&self) -> bool {
        self.coeffs.values().all(|v| v.is_divisible_by_one_plus_y())
    }

    /// Coefficients evaluated at `y0`, by generator index.
    pub fn eval_at(&self, y0: &S) -> Result<BTreeMap<usize, S>, LaurentError> {
        let mut out = BTreeMap::new();
        for (k, v) in &self.coeffs {
            let x = v.eval_at(y0)?;
            if !x.is_zero() {
                out.insert(*k, x);
            }
        }
        Ok(out)
    }

    /// `sum_b coeff_b * point_degree(b)` over the normal form.
    pub fn point_pairing(&self) -> Laurent<S> {
        let mut out = Laurent::zero();
        for (k, v) in &self.coeffs {
            out = &out + &v.scale(&S::from_ratio(self.pres.generators[*k].point_degree, 1));
        }
        out
    }

    pub fn render(&self) -> String {
        if self.coeffs.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(k, v)| {
                let g = format!("[O_{}]", self.pres.generators[*k].name);
                if v.is_one() {
                    g
                } else {
                    format!("({})*{}", v.render(), g)
                }
            })
            .collect();
        parts.join(" + ")
    }
}

fn add_coeff<S: Scalar>(map: &mut BTreeMap<usize, Laurent<S>>, k: usize, v: Laurent<S>) {
    if v.is_zero() {
        return;
    }
    let e = map.entry(k).or_insert_with(Laurent::zero);
    *e = &*e + &v;
    if e.is_zero() {
        map.remove(&k);
    }
}

impl<S: Scalar> fmt::Display for KClass<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl<S: Scalar> fmt::Debug for KClass<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KClass[{}]({})", self.pres.name, self.render())
    }
}

impl<S: Scalar> Add<&KClass<S>> for &KClass<S> {
    type Output = KClass<S>;

    fn add(self, rhs: &KClass<S>) -> KClass<S> {
        self.checked_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl<S: Scalar> Sub<&KClass<S>> for &KClass<S> {
    type Output = KClass<S>;

    fn sub(self, rhs: &KClass<S>) -> KClass<S> {
        self.checked_sub(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl<S: Scalar> Neg for &KClass<S> {
    type Output = KClass<S>;

    fn neg(self) -> KClass<S> {
        KClass {
            pres: self.pres.clone(),
            coeffs: self.coeffs.iter().map(|(k, v)| (*k, -v)).collect(),
        }
    }
}

/// Images of the generators of `source` under `i^!`, as integer classes in
/// `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GysinTable {
    source: Arc<KPresentation>,
    target: Arc<KPresentation>,
    images: Vec<IntCombo>,
    in_fiber: Vec<bool>,
}

impl GysinTable {
    /// `images[g]` is `None` when the entry is missing. `in_fiber[g]` marks
    /// generators supported inside the zero fiber; their image must vanish.
    pub fn new(
        source: Arc<KPresentation>,
        target: Arc<KPresentation>,
        images: Vec<Option<IntCombo>>,
        in_fiber: Vec<bool>,
    ) -> Result<Self, KError> {
        let mut normalized = Vec::with_capacity(images.len());
        for (g, image) in source
            .generators
            .iter()
            .zip(images.iter().chain(std::iter::repeat(&None)))
        {
            let image = image.as_ref().ok_or_else(|| KError::MissingGysinEntry {
                source_pres: source.name.clone(),
                generator: g.name.clone(),
            })?;
            if let Some(&k) = image.keys().find(|&&k| k >= target.generators.len()) {
                return Err(KError::UnknownGenerator {
                    presentation: target.name.clone(),
                    name: format!("#{k}"),
                });
            }
            normalized.push(target.normalize(image));
        }
        let mut in_fiber = in_fiber;
        in_fiber.resize(source.generators.len(), false);
        for (g, inside) in in_fiber.iter().enumerate() {
            if *inside && !normalized[g].is_empty() {
                return Err(KError::GysinFiber(source.generators[g].name.clone()));
            }
        }
        for (index, rel) in source.relations.iter().enumerate() {
            let mut image = IntCombo::new();
            for (&g, &c) in rel {
                for (&k, &v) in &normalized[g] {
                    accumulate(&mut image, k, c * v);
                }
            }
            if !target.normalize(&image).is_empty() {
                return Err(KError::GysinRelation {
                    source_pres: source.name.clone(),
                    index,
                });
            }
        }
        Ok(GysinTable {
            source,
            target,
            images: normalized,
            in_fiber,
        })
    }

    pub fn source(&self) -> &Arc<KPresentation> {
        &self.source
    }

    pub fn target(&self) -> &Arc<KPresentation> {
        &self.target
    }

    pub fn image(&self, g: usize) -> &IntCombo {
        &self.images[g]
    }

    pub fn in_fiber(&self, g: usize) -> bool {
        self.in_fiber[g]
    }
}

/// `i^!` extended additively and `Q[y, y^-1]`-linearly.
pub fn gysin_shriek<S: Scalar>(c: &KClass<S>, table: &GysinTable) -> Result<KClass<S>, KError> {
    if *c.pres != *table.source {
        return Err(KError::PresentationMismatch(
            c.pres.name.clone(),
            table.source.name.clone(),
        ));
    }
    let mut terms = Vec::new();
    for (g, v) in c.terms() {
        for (&k, &m) in table.image(g) {
            terms.push((k, v.scale(&S::from_ratio(m, 1))));
        }
    }
    Ok(KClass::from_terms(&table.target, terms))
}

/// Name of the coordinate stratum `E_I` in `A^n`: `pt` for the origin,
/// otherwise `E` followed by the 1-based indices.
pub fn stratum_name(n: usize, subset: &[usize]) -> String {
    if subset.len() == n {
        return "pt".into();
    }
    let sep = if subset.iter().any(|i| *i >= 9) {
        "_"
    } else {
        ""
    };
    let ids: Vec<String> = subset.iter().map(|i| (i + 1).to_string()).collect();
    format!("E{}", ids.join(sep))
}

/// Presentations and Gysin table for `f = prod x_i^{a_i}` on `A^n`.
#[derive(Debug, Clone)]
pub struct Arrangement {
    pub exponents: Vec<u32>,
    /// Nonempty subsets of the components, by size then lexicographically.
    pub strata: Vec<Vec<usize>>,
    pub ambient: Arc<KPresentation>,
    pub fiber: Arc<KPresentation>,
    pub gysin: GysinTable,
}

impl Arrangement {
    pub fn new(exponents: &[u32]) -> Result<Self, KError> {
        let n = exponents.len() as u32;
        let components: Vec<usize> = (0..exponents.len()).filter(|i| exponents[*i] > 0).collect();
        if components.is_empty() {
            return Err(KError::Arrangement("the monomial has no zeros".into()));
        }
        let strata = nonempty_subsets(&components);
        let levels = *exponents.iter().max().expect("nonempty");
        let mut fiber_gens: Vec<KGenerator> = (1..=levels)
            .map(|k| {
                KGenerator::new(
                    if k == 1 {
                        "X0".to_string()
                    } else {
                        format!("U{k}")
                    },
                    n - 1,
                    0,
                )
            })
            .collect();
        let offset = fiber_gens.len();
        for s in &strata {
            let dim = n - s.len() as u32;
            fiber_gens.push(KGenerator::new(
                stratum_name(n as usize, s),
                dim,
                i64::from(dim == 0),
            ));
        }
        let stratum_index: BTreeMap<&Vec<usize>, usize> = strata
            .iter()
            .enumerate()
            .map(|(i, s)| (s, offset + i))
            .collect();
        let mut relations = Vec::new();
        for k in 1..=levels {
            let support: Vec<usize> = components
                .iter()
                .copied()
                .filter(|i| exponents[*i] >= k)
                .collect();
            let mut rel = IntCombo::from([(k as usize - 1, 1)]);
            for s in nonempty_subsets(&support) {
                let sign = if s.len() % 2 == 1 { -1 } else { 1 };
                accumulate(&mut rel, stratum_index[&s], sign);
            }
            relations.push(rel);
        }
        let name = monomial_name(exponents);
        let fiber = Arc::new(KPresentation::build(
            format!("X0({name})"),
            fiber_gens,
            relations,
            true,
        )?);

        let mut ambient_gens = vec![KGenerator::new(format!("A^{n}"), n, i64::from(n == 0))];
        for s in &strata {
            let dim = n - s.len() as u32;
            ambient_gens.push(KGenerator::new(
                stratum_name(n as usize, s),
                dim,
                i64::from(dim == 0),
            ));
        }
        let ambient = Arc::new(KPresentation::build(
            format!("A^{n}"),
            ambient_gens,
            vec![],
            true,
        )?);
        let mut images = vec![Some(
            (0..levels as usize).map(|k| (k, 1)).collect::<IntCombo>(),
        )];
        images.extend(strata.iter().map(|_| Some(IntCombo::new())));
        let mut in_fiber = vec![false];
        in_fiber.extend(strata.iter().map(|_| true));
        let gysin = GysinTable::new(ambient.clone(), fiber.clone(), images, in_fiber)?;
        Ok(Arrangement {
            exponents: exponents.to_vec(),
            strata,
            ambient,
            fiber,
            gysin,
        })
    }

    /// Index of `E_I` in the fiber presentation.
    pub fn fiber_stratum(&self, subset: &[usize]) -> Option<usize> {
        self.fiber
            .generator_index(&stratum_name(self.exponents.len(), subset))
            .ok()
    }
}

fn monomial_name(exponents: &[u32]) -> String {
    let vars: Vec<String> = exponents
        .iter()
        .enumerate()
        .filter(|(_, a)| **a > 0)
        .map(|(i, a)| {
            if *a == 1 {
                format!("x{}", i + 1)
            } else {
                format!("x{}^{a}", i + 1)
            }
        })
        .collect();
    vars.join("*")
}

/// Nonempty subsets of `items`, by size and then lexicographically.
pub fn nonempty_subsets(items: &[usize]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (1u64..(1 << items.len()))
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(j, _)| mask >> j & 1 == 1)
                .map(|(_, i)| *i)
                .collect()
        })
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Multi-indices `c` with `0 <= c_i <= n_i`, lexicographic.
pub fn basis_multi_indices(factors: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for &n in factors {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..=n).map(move |c| {
                    let mut p = prefix.clone();
                    p.push(c);
                    p
                })
            })
            .collect();
    }
    out
}

/// Name of `O_L` with `L` of codimension `c_i` in the `i`-th factor.
pub fn basis_name(factors: &[u32], c: &[u32]) -> String {
    if factors.is_empty() {
        return "pt".into();
    }
    factors
        .iter()
        .zip(c)
        .map(|(n, c)| format!("L{}", n - c))
        .collect::<Vec<_>>()
        .join("x")
}

/// `K(P^n1 x ... x P^nk)` on the basis `[O_L]`.
pub fn projective_product(factors: &[u32]) -> Arc<KPresentation> {
    if factors.is_empty() {
        return Arc::new(KPresentation::point());
    }
    let gens = basis_multi_indices(factors)
        .iter()
        .map(|c| {
            let dim = factors.iter().zip(c).map(|(n, c)| n - c).sum();
            KGenerator::new(basis_name(factors, c), dim, 1)
        })
        .collect();
    let name = factors
        .iter()
        .map(|n| format!("P{n}"))
        .collect::<Vec<_>>()
        .join("x");
    Arc::new(KPresentation::build(name, gens, vec![], true).expect("free presentation"))
}

/// `ch(O_L) = prod (1 - e^{-h_i})^{c_i}`.
pub fn basis_character<S: Scalar>(pres: &Arc<RingPresentation<S>>, c: &[u32]) -> GradedClass<S> {
    let mut out = GradedClass::one(pres);
    for (i, ci) in c.iter().enumerate() {
        let h = GradedClass::generator(pres, i);
        let e = h
            .scale_scalar(&-S::one())
            .series_exp()
            .expect("h has no constant term");
        let factor = &GradedClass::one(pres) - &e;
        out = &out * &factor.pow(*ci);
    }
    out
}

/// Coordinates on the `[O_L]` basis of a class given by its Chern
/// character, in the order of [`basis_multi_indices`].
pub fn character_to_basis<S: Scalar>(
    factors: &[u32],
    ch: &GradedClass<Laurent<S>>,
) -> Vec<Laurent<S>> {
    let pres = ch.presentation();
    let basis = basis_multi_indices(factors);
    let mut residual = ch.clone();
    let mut coords = vec![Laurent::zero(); basis.len()];
    // ch(O_L) = h^c + higher order terms: peel off the lowest degree first
    for d in 0..=pres.dimension() {
        let low: Vec<(Vec<u32>, Laurent<S>)> = residual
            .component(d)
            .terms()
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        for (m, c) in low {
            let idx = basis
                .iter()
                .position(|b| *b == m)
                .expect("normal-form monomials are basis indices");
            let chb = basis_character(pres, &m).map_coeffs(|s| Laurent::constant(s.clone()));
            residual = &residual - &chb.scale(&c);
            coords[idx] = &coords[idx] + &c;
        }
    }
    debug_assert!(residual.is_zero());
    coords
}

/// Presentations for `X = M x A^1`, `X_0 = M x 0`, `f = t`: generators
/// `V x A1` over `X`, `V` over the fiber, and `i^![V x A1] = [V]`.
#[derive(Debug, Clone)]
pub struct ProductFamily {
    pub factors: Vec<u32>,
    pub ambient: Arc<KPresentation>,
    pub fiber: Arc<KPresentation>,
    pub gysin: GysinTable,
}

impl ProductFamily {
    pub fn new(factors: &[u32]) -> Result<Self, KError> {
        let fiber = projective_product(factors);
        let gens = fiber
            .generators
            .iter()
            .map(|g| {
                let name = if factors.is_empty() {
                    "A1".to_string()
                } else {
                    format!("{}xA1", g.name)
                };
                KGenerator::new(name, g.dim + 1, 0)
            })
            .collect();
        let name = format!("{}xA1", fiber.name);
        let ambient = Arc::new(KPresentation::build(name, gens, vec![], true)?);
        let images = (0..fiber.generators.len())
            .map(|i| Some(IntCombo::from([(i, 1)])))
            .collect();
        let gysin = GysinTable::new(ambient.clone(), fiber.clone(), images, vec![])?;
        Ok(ProductFamily {
            factors: factors.to_vec(),
            ambient,
            fiber,
            gysin,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genus::{lambda_y_character, BuiltinSpace};
    use crate::Rational;
    use proptest::prelude::*;

    type K = KClass<Rational>;

    fn lp(s: &str) -> Laurent<Rational> {
        s.parse().unwrap()
    }

    fn node_fiber() -> Arc<KPresentation> {
        let gens = vec![
            KGenerator::new("X0", 1, 0),
            KGenerator::new("E1", 1, 0),
            KGenerator::new("E2", 1, 0),
            KGenerator::new("pt", 0, 1),
        ];
        let rel = vec![
            ("X0".to_string(), 1),
            ("E1".into(), -1),
            ("E2".into(), -1),
            ("pt".into(), 1),
        ];
        Arc::new(KPresentation::from_named("node", gens, &[rel]).unwrap())
    }

    #[test]
    fn group_axioms_on_generators() {
        let p = node_fiber();
        let v = K::named(&p, "E1").unwrap();
        assert_eq!(&v + &v, v.scale(&lp("2")));
        let yv = v.scale(&lp("y"));
        assert!((&yv - &yv).is_zero());
    }

    #[test]
    fn structure_sequence_normal_form() {
        let p = node_fiber();
        let x0 = K::named(&p, "X0").unwrap();
        let expected = &(&K::named(&p, "E1").unwrap() + &K::named(&p, "E2").unwrap())
            - &K::named(&p, "pt").unwrap();
        assert_eq!(x0, expected);
        p.check_normal_forms(1000, 3).unwrap();
    }

    #[test]
    fn non_unit_lead_is_rejected() {
        let gens = vec![KGenerator::new("a", 1, 0), KGenerator::new("b", 1, 0)];
        let err =
            KPresentation::new("bad", gens, vec![IntCombo::from([(0, 2), (1, 1)])]).unwrap_err();
        assert!(matches!(err, KError::NonUnitLead { .. }));
    }

    #[test]
    fn overlapping_relations_are_saturated() {
        // a = b + c, a = 2c + d  =>  b = c + d
        let gens = ["a", "b", "c", "d"]
            .iter()
            .map(|n| KGenerator::new(*n, 0, 1))
            .collect();
        let rels = vec![
            IntCombo::from([(0, 1), (1, -1), (2, -1)]),
            IntCombo::from([(0, 1), (2, -2), (3, -1)]),
        ];
        let p = Arc::new(KPresentation::new("sat", gens, rels).unwrap());
        p.check_normal_forms(1000, 11).unwrap();
        assert_eq!(p.free_generators(), vec![2, 3]);
        assert_eq!(
            K::named(&p, "b").unwrap(),
            &K::named(&p, "c").unwrap() + &K::named(&p, "d").unwrap()
        );
        assert!(!p.is_builtin());
    }

    #[test]
    fn arrangement_for_node() {
        let a = Arrangement::new(&[1, 1]).unwrap();
        a.fiber.check_normal_forms(1000, 1).unwrap();
        let src = K::named(&a.ambient, "A^2").unwrap();
        let image = gysin_shriek(&src, &a.gysin).unwrap();
        assert_eq!(image, K::named(&a.fiber, "X0").unwrap());
        let pt = K::named(&a.ambient, "pt").unwrap();
        assert!(gysin_shriek(&pt, &a.gysin).unwrap().is_zero());
        assert_eq!(image.render(), "[O_E1] + [O_E2] + (-1)*[O_pt]");
    }

    #[test]
    fn arrangement_for_powers_of_t() {
        for k in 1..=4u32 {
            let a = Arrangement::new(&[k]).unwrap();
            let image = gysin_shriek(&K::named(&a.ambient, "A^1").unwrap(), &a.gysin).unwrap();
            assert_eq!(
                image,
                K::named(&a.fiber, "pt")
                    .unwrap()
                    .scale(&Laurent::from_i64(k as i64))
            );
        }
    }

    #[test]
    fn arrangement_levels_for_mixed_exponents() {
        // O/(x^2 y) has pieces O/(xy) and O/(x)
        let a = Arrangement::new(&[2, 1]).unwrap();
        let image = gysin_shriek(&K::named(&a.ambient, "A^2").unwrap(), &a.gysin).unwrap();
        let e = |n: &str| K::named(&a.fiber, n).unwrap();
        let expected = &(&e("E1").scale(&lp("2")) + &e("E2")) - &e("pt");
        assert_eq!(image, expected);
        a.fiber.check_normal_forms(1000, 2).unwrap();
    }

    #[test]
    fn arrangement_of_three_planes() {
        let a = Arrangement::new(&[1, 1, 1]).unwrap();
        assert_eq!(a.strata.len(), 7);
        assert_eq!(a.fiber.free_generators().len(), 7);
        let x0 = K::named(&a.fiber, "X0").unwrap();
        assert_eq!(x0.coeff_of("pt").unwrap(), lp("1"));
        assert_eq!(x0.coeff_of("E12").unwrap(), lp("-1"));
    }

    #[test]
    fn gysin_table_checks() {
        let a = Arrangement::new(&[1, 1]).unwrap();
        let mut images: Vec<Option<IntCombo>> = (0..a.ambient.generators().len())
            .map(|_| Some(IntCombo::new()))
            .collect();
        images[0] = None;
        let err = GysinTable::new(a.ambient.clone(), a.fiber.clone(), images.clone(), vec![])
            .unwrap_err();
        assert!(matches!(err, KError::MissingGysinEntry { .. }));
        images[0] = Some(IntCombo::new());
        images[1] = Some(IntCombo::from([(3, 1)]));
        let err = GysinTable::new(
            a.ambient.clone(),
            a.fiber.clone(),
            images,
            vec![false, true],
        )
        .unwrap_err();
        assert!(matches!(err, KError::GysinFiber(_)));
    }

    #[test]
    fn gysin_must_respect_source_relations() {
        let src = node_fiber();
        let tgt = Arc::new(KPresentation::point());
        let images = vec![
            Some(IntCombo::new()),
            Some(IntCombo::new()),
            Some(IntCombo::new()),
            Some(IntCombo::from([(0, 1)])),
        ];
        let err = GysinTable::new(src, tgt, images, vec![]).unwrap_err();
        assert!(matches!(err, KError::GysinRelation { .. }));
    }

    #[test]
    fn basis_of_projective_line_from_characters() {
        // lambda_y(Omega_P1) = (1+y) O - 2y O_pt
        let space = BuiltinSpace::projective(1);
        let ring = space.presentation::<Rational>();
        let ch = lambda_y_character(&space.cotangent_bundle(&ring)).unwrap();
        let coords = character_to_basis(&[1], &ch);
        assert_eq!(coords, vec![lp("1 + y"), lp("-2*y")]);
        assert_eq!(basis_name(&[1], &[0]), "L1");
        assert_eq!(basis_name(&[1], &[1]), "L0");
    }

    #[test]
    fn basis_round_trip_on_products() {
        let factors = [2, 1];
        let ring = Arc::new(RingPresentation::<Rational>::product_of_projective_spaces(
            &factors,
        ));
        for (i, c) in basis_multi_indices(&factors).iter().enumerate() {
            let ch = basis_character(&ring, c).map_coeffs(|s| Laurent::constant(s.clone()));
            let coords = character_to_basis(&factors, &ch);
            for (j, v) in coords.iter().enumerate() {
                assert_eq!(*v, if i == j { lp("1") } else { lp("0") });
            }
        }
    }

    #[test]
    fn product_family_gysin_is_restriction() {
        let fam = ProductFamily::new(&[1]).unwrap();
        assert_eq!(fam.ambient.generators()[0].name, "L1xA1");
        let c = K::named(&fam.ambient, "L0xA1").unwrap().scale(&lp("y"));
        assert_eq!(
            gysin_shriek(&c, &fam.gysin).unwrap(),
            K::named(&fam.fiber, "L0").unwrap().scale(&lp("y"))
        );
        let pt = ProductFamily::new(&[]).unwrap();
        assert_eq!(pt.ambient.generators()[0].name, "A1");
        assert_eq!(pt.fiber.generators()[0].name, "pt");
    }

    fn arb_class(p: Arc<KPresentation>) -> impl Strategy<Value = K> {
        let n = p.generators().len();
        prop::collection::vec((0..n, -3i64..=3, -2i32..=2), 0..5).prop_map(move |ts| {
            KClass::from_terms(
                &p,
                ts.into_iter()
                    .map(|(g, c, e)| (g, Laurent::monomial(Rational::from_ratio(c, 1), e))),
            )
        })
    }

    proptest! {
        #[test]
        fn gysin_is_additive_and_linear(
            a in arb_class(Arrangement::new(&[2, 1, 1]).unwrap().ambient),
            b in arb_class(Arrangement::new(&[2, 1, 1]).unwrap().ambient),
            e in -3i32..=3,
        ) {
            let arr = Arrangement::new(&[2, 1, 1]).unwrap();
            let g = |c: &K| gysin_shriek(c, &arr.gysin).unwrap();
            prop_assert_eq!(g(&(&a + &b)), &g(&a) + &g(&b));
            let s = Laurent::monomial(Rational::from_ratio(2, 1), e);
            prop_assert_eq!(g(&a.scale(&s)), g(&a).scale(&s));
        }

        #[test]
        fn normalization_is_idempotent(a in arb_class(Arrangement::new(&[1, 1, 1]).unwrap().fiber)) {
            let again = KClass::from_terms(a.presentation(), a.terms().map(|(g, c)| (g, c.clone())));
            prop_assert_eq!(again, a);
        }
    }
}
