//! Presented graded commutative rings truncated at an ambient dimension.
//!
//! A presentation has graded generators, monomial (Stanley-Reisner style)
//! relations, homogeneous linear relations among generators, and a point
//! class whose coefficient defines the degree functional. Linear relations
//! eliminate the latest-declared generator they involve, so normal forms are
//! polynomials in the earlier generators.

mod class;
mod series;

pub use class::GradedClass;
pub use series::PowerSeries;

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::scalar::Scalar;

/// Exponent vector over all generators of a presentation.
pub type Monomial = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("classes live in different presentations (`{0}` vs `{1}`)")]
    PresentationMismatch(String, String),
    #[error("constant term must be {expected}")]
    ConstantTerm { expected: &'static str },
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
    #[error("normal form depends on reduction order after {trials} trials: {detail}")]
    Confluence { trials: usize, detail: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingGenerator {
    pub name: String,
    pub degree: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RingPresentation<S> {
    name: String,
    generators: Vec<RingGenerator>,
    monomial_relations: Vec<Monomial>,
    linear_relations: Vec<Vec<(usize, S)>>,
    dimension: u32,
    point_class: Monomial,
    /// `substitution[g] = Some(combination)` when generator `g` is eliminated.
    substitution: Vec<Option<Vec<(usize, S)>>>,
}

impl<S: Scalar> RingPresentation<S> {
    pub fn new(
        name: impl Into<String>,
        generators: Vec<RingGenerator>,
        monomial_relations: Vec<Monomial>,
        linear_relations: Vec<Vec<(usize, S)>>,
        dimension: u32,
        point_class: Monomial,
    ) -> Result<Self, RingError> {
        let n = generators.len();
        let bad = |msg: String| Err(RingError::InvalidPresentation(msg));
        if let Some(g) = generators.iter().find(|g| g.degree == 0) {
            return bad(format!("generator `{}` has degree 0", g.name));
        }
        for m in monomial_relations
            .iter()
            .chain(std::iter::once(&point_class))
        {
            if m.len() != n {
                return bad(format!("monomial {m:?} has wrong arity"));
            }
        }
        if monomial_relations.iter().any(|m| m.iter().all(|&e| e == 0)) {
            return bad("the unit monomial cannot be a relation".into());
        }
        for rel in &linear_relations {
            let mut degrees = rel
                .iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(g, _)| generators.get(*g).map(|gen| gen.degree));
            let first = match degrees.next() {
                Some(Some(d)) => d,
                Some(None) => return bad("linear relation references an unknown generator".into()),
                None => continue,
            };
            for d in degrees {
                match d {
                    Some(d) if d == first => {}
                    Some(_) => return bad("linear relation is not homogeneous".into()),
                    None => return bad("linear relation references an unknown generator".into()),
                }
            }
        }
        let substitution = eliminate(n, &linear_relations);
        let pres = RingPresentation {
            name: name.into(),
            generators,
            monomial_relations,
            linear_relations,
            dimension,
            point_class,
            substitution,
        };
        if pres.monomial_degree(&pres.point_class) != dimension {
            return bad("point class is not of top degree".into());
        }
        if pres.is_eliminated_monomial(&pres.point_class) || pres.is_killed(&pres.point_class) {
            return bad("point class is not a normal-form monomial".into());
        }
        Ok(pres)
    }

    /// The point: no generators, dimension 0, `degree(1) = 1`.
    pub fn point() -> Self {
        Self::new("pt", vec![], vec![], vec![], 0, vec![]).expect("point presentation")
    }

    /// `Q[h]/(h^{n+1})` with point class `h^n`.
    pub fn projective_space(n: u32) -> Self {
        Self::new(
            format!("P{n}"),
            vec![RingGenerator {
                name: "h".into(),
                degree: 1,
            }],
            vec![vec![n + 1]],
            vec![],
            n,
            vec![n],
        )
        .expect("projective space presentation")
    }

    /// Tensor product presentation of `P^{n_1} x ... x P^{n_k}`.
    pub fn product_of_projective_spaces(dims: &[u32]) -> Self {
        match dims {
            [] => Self::point(),
            [n] => Self::projective_space(*n),
            _ => {
                let generators = (0..dims.len())
                    .map(|i| RingGenerator {
                        name: format!("h{}", i + 1),
                        degree: 1,
                    })
                    .collect();
                let relations = dims
                    .iter()
                    .enumerate()
                    .map(|(i, &n)| {
                        let mut m = vec![0; dims.len()];
                        m[i] = n + 1;
                        m
                    })
                    .collect();
                let name = dims
                    .iter()
                    .map(|n| format!("P{n}"))
                    .collect::<Vec<_>>()
                    .join("x");
                Self::new(
                    name,
                    generators,
                    relations,
                    vec![],
                    dims.iter().sum(),
                    dims.to_vec(),
                )
                .expect("product presentation")
            }
        }
    }

    /// Tensor product of two presentations.
    pub fn tensor(&self, other: &Self) -> Self {
        let shift = self.generators.len();
        let total = shift + other.generators.len();
        let pad = |m: &Monomial, left: bool| {
            let mut out = vec![0; total];
            let offset = if left { 0 } else { shift };
            for (i, e) in m.iter().enumerate() {
                out[offset + i] = *e;
            }
            out
        };
        let mut generators = self.generators.clone();
        generators.extend(other.generators.iter().cloned());
        let mut monos: Vec<Monomial> = self
            .monomial_relations
            .iter()
            .map(|m| pad(m, true))
            .collect();
        monos.extend(other.monomial_relations.iter().map(|m| pad(m, false)));
        let mut linear = self.linear_relations.clone();
        linear.extend(
            other
                .linear_relations
                .iter()
                .map(|r| r.iter().map(|(g, c)| (g + shift, c.clone())).collect()),
        );
        let mut point = pad(&self.point_class, true);
        for (i, e) in other.point_class.iter().enumerate() {
            point[shift + i] = *e;
        }
        Self::new(
            format!("{}x{}", self.name, other.name),
            generators,
            monos,
            linear,
            self.dimension + other.dimension,
            point,
        )
        .expect("tensor product of valid presentations is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn generators(&self) -> &[RingGenerator] {
        &self.generators
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    pub fn point_class(&self) -> &Monomial {
        &self.point_class
    }

    pub fn monomial_relations(&self) -> &[Monomial] {
        &self.monomial_relations
    }

    pub fn linear_relations(&self) -> &[Vec<(usize, S)>] {
        &self.linear_relations
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.name == name)
    }

    pub fn unit_monomial(&self) -> Monomial {
        vec![0; self.generators.len()]
    }

    pub fn monomial_degree(&self, m: &[u32]) -> u32 {
        m.iter()
            .zip(&self.generators)
            .map(|(e, g)| e * g.degree)
            .sum()
    }

    fn is_eliminated_monomial(&self, m: &[u32]) -> bool {
        m.iter()
            .zip(&self.substitution)
            .any(|(e, s)| *e > 0 && s.is_some())
    }

    /// Killed by truncation or by a monomial relation.
    fn is_killed(&self, m: &[u32]) -> bool {
        self.monomial_degree(m) > self.dimension
            || self
                .monomial_relations
                .iter()
                .any(|r| r.iter().zip(m).all(|(a, b)| a <= b))
    }

    /// Substitute the linear eliminations into `m`, truncating on the way.
    fn expand_substitutions(&self, m: &[u32], coeff: S) -> BTreeMap<Monomial, S> {
        let mut acc: BTreeMap<Monomial, S> = BTreeMap::new();
        let mut base = m.to_vec();
        let mut pending = Vec::new();
        for (g, sub) in self.substitution.iter().enumerate() {
            if let Some(sub) = sub {
                for _ in 0..m[g] {
                    pending.push(sub);
                }
                base[g] = 0;
            }
        }
        acc.insert(base, coeff);
        for sub in pending {
            let mut next: BTreeMap<Monomial, S> = BTreeMap::new();
            for (mono, c) in &acc {
                for (g, sc) in sub {
                    let mut m2 = mono.clone();
                    m2[*g] += 1;
                    if self.monomial_degree(&m2) > self.dimension {
                        continue;
                    }
                    add_into(&mut next, m2, c.clone() * sc.clone());
                }
            }
            acc = next;
        }
        acc
    }

    /// Normal form: substitute linear eliminations, then drop killed monomials.
    pub(crate) fn reduce_terms(&self, terms: BTreeMap<Monomial, S>) -> BTreeMap<Monomial, S> {
        let mut out = BTreeMap::new();
        for (m, c) in terms {
            if self.is_eliminated_monomial(&m) {
                for (m2, c2) in self.expand_substitutions(&m, c) {
                    if !self.is_killed(&m2) {
                        add_into(&mut out, m2, c2);
                    }
                }
            } else if !self.is_killed(&m) {
                add_into(&mut out, m, c);
            }
        }
        out
    }

    /// Alternative order: apply monomial relations first, then substitute and
    /// re-apply. Agrees with [`Self::reduce_terms`] exactly when the declared
    /// relations are confluent.
    fn reduce_terms_lazily(&self, terms: BTreeMap<Monomial, S>) -> BTreeMap<Monomial, S> {
        let mut out = BTreeMap::new();
        for (m, c) in terms {
            if self.is_killed(&m) {
                continue;
            }
            for (m2, c2) in self.expand_substitutions(&m, c) {
                if !self.is_killed(&m2) {
                    add_into(&mut out, m2, c2);
                }
            }
        }
        out
    }

    /// Reduce `trials` random products of generators along two reduction
    /// orders and with two bracketings; fail on the first disagreement.
    pub fn check_confluence(&self, trials: usize, seed: u64) -> Result<(), RingError>
    where
        Self: Clone,
    {
        let n = self.generators.len();
        if n == 0 {
            return Ok(());
        }
        let pres = std::sync::Arc::new(self.clone());
        let mut rng = StdRng::seed_from_u64(seed);
        for trial in 0..trials {
            let len = rng.gen_range(1..=(self.dimension as usize + 2));
            let factors: Vec<usize> = (0..len).map(|_| rng.gen_range(0..n)).collect();
            let coeff = S::from_ratio(rng.gen_range(-9..=9), rng.gen_range(1..=5));
            let mut raw = vec![0; n];
            for g in &factors {
                raw[*g] += 1;
            }
            let one = BTreeMap::from([(raw, coeff.clone())]);
            let eager = self.reduce_terms(one.clone());
            let lazy = self.reduce_terms_lazily(one);
            if eager != lazy {
                return Err(RingError::Confluence {
                    trials: trial + 1,
                    detail: format!("product of generators {factors:?}"),
                });
            }
            let gens: Vec<GradedClass<S>> = factors
                .iter()
                .map(|g| GradedClass::generator(&pres, *g))
                .collect();
            let left = gens
                .iter()
                .fold(GradedClass::constant(&pres, coeff.clone()), |acc, g| {
                    &acc * g
                });
            let right = gens
                .iter()
                .rev()
                .fold(GradedClass::constant(&pres, coeff.clone()), |acc, g| {
                    g * &acc
                });
            let direct = GradedClass::from_terms(&pres, eager);
            if left != right || left != direct {
                return Err(RingError::Confluence {
                    trials: trial + 1,
                    detail: format!("bracketing of generators {factors:?}"),
                });
            }
        }
        Ok(())
    }
}

fn add_into<S: Scalar>(map: &mut BTreeMap<Monomial, S>, m: Monomial, c: S) {
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

/// Row-reduce the linear relations, pivoting on the latest generator in each.
fn eliminate<S: Scalar>(n: usize, relations: &[Vec<(usize, S)>]) -> Vec<Option<Vec<(usize, S)>>> {
    let mut rows: Vec<Vec<S>> = relations
        .iter()
        .map(|r| {
            let mut row = vec![S::zero(); n];
            for (g, c) in r {
                row[*g] = row[*g].clone() + c.clone();
            }
            row
        })
        .collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut next_row = 0;
    for col in (0..n).rev() {
        let Some(r) = (next_row..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(next_row, r);
        let inv = S::one() / rows[next_row][col].clone();
        for x in rows[next_row].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for r2 in 0..rows.len() {
            if r2 != next_row && !rows[r2][col].is_zero() {
                let factor = rows[r2][col].clone();
                let pivot = rows[next_row].clone();
                for (v, p) in rows[r2].iter_mut().zip(pivot).take(n) {
                    *v = v.clone() - factor.clone() * p;
                }
            }
        }
        pivots.push((next_row, col));
        next_row += 1;
    }
    let mut substitution = vec![None; n];
    for (r, col) in pivots {
        let combo = rows[r]
            .iter()
            .enumerate()
            .filter(|(k, c)| *k != col && !c.is_zero())
            .map(|(k, c)| (k, -c.clone()))
            .collect();
        substitution[col] = Some(combo);
    }
    substitution
}
