//! Motivic nearby and vanishing cycles from normal-crossing data.
//!
//! For `f` with zero divisor `sum m_i E_i` (simple normal crossings),
//!
//! ```text
//! Psi'_f = sum_{I nonempty} (1 - L)^{|I| - 1} [E~°_I -> X_0]
//! i^*    = sum_{I nonempty} (-1)^{|I| - 1} [E_I -> X_0]
//! Phi'_f = Psi'_f - i^*
//! ```
//!
//! where `E°_I = E_I` minus the other components and `E~°_I` is the
//! degree-`gcd(m_i : i in I)` cover of `E°_I` (Denef-Loeser; Guibert,
//! Loeser and Merle; Bittner). Cover classes are inputs: they default to
//! `E°_I` when the gcd is 1 and must be supplied otherwise. The monodromy
//! action on covers is forgotten.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_integer::Integer;
use thiserror::Error;

use crate::kgroup::{
    basis_multi_indices, basis_name, nonempty_subsets, Arrangement, GysinTable, IntCombo, KError,
    ProductFamily,
};
use crate::motivic::{MotivicClass, MotivicError, Registry, VarietyGenerator};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NearbyError {
    #[error("component `{0}`: multiplicity must be positive")]
    NonPositiveMultiplicity(String),
    #[error("stratum {0}: cover class required because the multiplicities have gcd {1}")]
    MissingCover(String, u32),
    #[error("stratum {0}: reduced multiplicities need the default cover, found {1}")]
    UnexpectedCover(String, String),
    #[error("stratum {stratum}: cover has Euler characteristic {found}, expected {expected} = gcd * chi(E°)")]
    CoverEuler {
        stratum: String,
        found: i64,
        expected: i64,
    },
    #[error("strata are not closed under intersection: {0}")]
    StrataNotClosed(String),
    #[error("unknown component index {0}")]
    UnknownComponent(usize),
    #[error("{0}")]
    Mismatch(String),
    #[error("input generator `{0}` has no nearby transform")]
    InputUnsupported(String),
    #[error(transparent)]
    Motivic(#[from] MotivicError),
    #[error(transparent)]
    K(#[from] KError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub name: String,
    pub multiplicity: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stratum {
    /// Component indices, ascending.
    pub components: Vec<usize>,
    /// Fiber generator of the closed stratum `E_I`.
    pub closure: usize,
    /// `E°_I`, expanded by additivity.
    pub open: MotivicClass,
    /// `E~°_I`.
    pub cover: MotivicClass,
}

/// Input data of the specialization identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SNCScenario {
    pub id: String,
    pub ambient_label: String,
    pub function_label: String,
    pub components: Vec<Component>,
    pub strata: Vec<Stratum>,
    /// Generators over `X_0`.
    pub fiber: Arc<Registry>,
    /// Generators over `X`.
    pub ambient: Arc<Registry>,
    pub gysin: GysinTable,
    /// Ambient generator standing for `[id_X]`.
    pub identity: usize,
    /// Nearby transforms of other ambient generators (pulled-back classes).
    pub transforms: BTreeMap<usize, MotivicClass>,
    pub builtin: bool,
    /// Factors of `M` for built-in `M x A^1` families.
    pub family: Option<Vec<u32>>,
}

/// Declared strata before validation: components and optional cover.
#[derive(Debug, Clone)]
pub struct StratumSpec {
    pub components: Vec<usize>,
    pub closure: usize,
    pub cover: Option<MotivicClass>,
}

impl SNCScenario {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: impl Into<String>,
        ambient_label: impl Into<String>,
        function_label: impl Into<String>,
        components: Vec<Component>,
        strata: Vec<StratumSpec>,
        fiber: Arc<Registry>,
        ambient: Arc<Registry>,
        gysin: GysinTable,
        identity: usize,
        transforms: BTreeMap<usize, MotivicClass>,
        builtin: bool,
        family: Option<Vec<u32>>,
    ) -> Result<Self, NearbyError> {
        for c in &components {
            if c.multiplicity <= 0 {
                return Err(NearbyError::NonPositiveMultiplicity(c.name.clone()));
            }
        }
        if **fiber.base() != **gysin.target() {
            return Err(NearbyError::Mismatch(
                "fiber generators must live over the Gysin target".into(),
            ));
        }
        if **ambient.base() != **gysin.source() {
            return Err(NearbyError::Mismatch(
                "ambient generators must live over the Gysin source".into(),
            ));
        }
        if identity >= ambient.generators().len() {
            return Err(NearbyError::Mismatch(
                "identity generator out of range".into(),
            ));
        }
        let mut specs = strata;
        for s in &mut specs {
            s.components.sort_unstable();
            s.components.dedup();
            if let Some(&i) = s.components.iter().find(|i| **i >= components.len()) {
                return Err(NearbyError::UnknownComponent(i));
            }
            if s.components.is_empty() {
                return Err(NearbyError::StrataNotClosed("empty stratum".into()));
            }
        }
        specs.sort_by(|a, b| {
            a.components
                .len()
                .cmp(&b.components.len())
                .then_with(|| a.components.cmp(&b.components))
        });
        let present: BTreeSet<Vec<usize>> = specs.iter().map(|s| s.components.clone()).collect();
        if present.len() != specs.len() {
            return Err(NearbyError::StrataNotClosed("duplicate stratum".into()));
        }
        for (i, c) in components.iter().enumerate() {
            if !present.contains(&vec![i]) {
                return Err(NearbyError::StrataNotClosed(format!(
                    "component `{}` has no stratum",
                    c.name
                )));
            }
        }
        for s in &present {
            for sub in nonempty_subsets(s) {
                if !present.contains(&sub) {
                    return Err(NearbyError::StrataNotClosed(format!(
                        "{:?} present but {:?} missing",
                        s, sub
                    )));
                }
            }
        }
        let mut built = Vec::new();
        for s in &specs {
            let name = fiber.generators()[s.closure].name.clone();
            let mut boundary = MotivicClass::zero(&fiber);
            for t in &specs {
                if t.components.len() > s.components.len()
                    && s.components.iter().all(|i| t.components.contains(i))
                {
                    let sign = if (t.components.len() - s.components.len()) % 2 == 1 {
                        1
                    } else {
                        -1
                    };
                    boundary = &boundary + &MotivicClass::generator(&fiber, t.closure).scale(sign);
                }
            }
            let open = MotivicClass::expand_open_stratum(&fiber, s.closure, &boundary)?;
            let g = s
                .components
                .iter()
                .fold(0i64, |acc, i| acc.gcd(&components[*i].multiplicity));
            let cover = match (&s.cover, g) {
                (None, 1) => open.clone(),
                (None, g) => return Err(NearbyError::MissingCover(name, g as u32)),
                (Some(c), 1) if *c != open => {
                    return Err(NearbyError::UnexpectedCover(name, c.render()))
                }
                (Some(c), _) => c.clone(),
            };
            if **cover.registry() != *fiber {
                return Err(NearbyError::Mismatch(format!(
                    "cover of {name} is not over the fiber"
                )));
            }
            let expected = g * open.euler_of();
            if cover.euler_of() != expected {
                return Err(NearbyError::CoverEuler {
                    stratum: name,
                    found: cover.euler_of(),
                    expected,
                });
            }
            built.push(Stratum {
                components: s.components.clone(),
                closure: s.closure,
                open,
                cover,
            });
        }
        Ok(SNCScenario {
            id: id.into(),
            ambient_label: ambient_label.into(),
            function_label: function_label.into(),
            components,
            strata: built,
            fiber,
            ambient,
            gysin,
            identity,
            transforms,
            builtin,
            family,
        })
    }

    /// `f = prod x_i^{a_i}` on `A^n` with built-in presentations. `covers`
    /// maps component subsets (indices into the coordinates with positive
    /// exponent) to cover classes written over the fiber generators.
    pub fn affine_monomial(
        id: &str,
        exponents: &[u32],
        covers: &[(Vec<usize>, String)],
    ) -> Result<Self, NearbyError> {
        let arr = Arrangement::new(exponents)?;
        let n = exponents.len();
        let coords: Vec<usize> = (0..n).filter(|i| exponents[*i] > 0).collect();
        let mut fiber = Registry::new(arr.fiber.clone());
        let mut closures = Vec::new();
        for s in &arr.strata {
            let name = crate::kgroup::stratum_name(n, s);
            let idx = arr.fiber.generator_index(&name)?;
            let within = arr
                .strata
                .iter()
                .filter(|t| t.len() > s.len() && s.iter().all(|i| t.contains(i)))
                .map(|t| crate::kgroup::stratum_name(n, t))
                .collect();
            closures.push(fiber.add(VarietyGenerator {
                name,
                compact_factors: vec![],
                affine_dim: (n - s.len()) as u32,
                images: vec![IntCombo::from([(idx, 1)])],
                within,
            })?);
        }
        let fiber = Arc::new(fiber);
        let mut ambient = Registry::new(arr.ambient.clone());
        let identity = ambient.add(VarietyGenerator {
            name: format!("A^{n}"),
            compact_factors: vec![],
            affine_dim: n as u32,
            images: vec![IntCombo::from([(0, 1)])],
            within: BTreeSet::new(),
        })?;
        let ambient = Arc::new(ambient);
        let components = coords
            .iter()
            .map(|i| Component {
                name: format!("E{}", i + 1),
                multiplicity: i64::from(exponents[*i]),
            })
            .collect();
        let mut specs = Vec::new();
        for (s, closure) in arr.strata.iter().zip(closures) {
            let comps: Vec<usize> = s
                .iter()
                .map(|c| {
                    coords
                        .iter()
                        .position(|x| x == c)
                        .expect("stratum of components")
                })
                .collect();
            let cover = match covers.iter().find(|(k, _)| *k == comps) {
                Some((_, text)) => Some(MotivicClass::parse(&fiber, text)?),
                None => None,
            };
            specs.push(StratumSpec {
                components: comps,
                closure,
                cover,
            });
        }
        let label = function_label(exponents);
        Self::new(
            id,
            format!("A^{n}"),
            label,
            components,
            specs,
            fiber,
            ambient,
            arr.gysin,
            identity,
            BTreeMap::new(),
            true,
            None,
        )
    }

    /// `f = t` on `M x A^1` with `M` a product of projective spaces.
    pub fn product_family(id: &str, factors: &[u32]) -> Result<Self, NearbyError> {
        let fam = ProductFamily::new(factors)?;
        let basis = basis_multi_indices(factors);
        let mut fiber = Registry::new(fam.fiber.clone());
        let mut ambient = Registry::new(fam.ambient.clone());
        let all_names: Vec<String> = basis.iter().map(|c| basis_name(factors, c)).collect();
        for (i, c) in basis.iter().enumerate() {
            // L_c is a product of linear subspaces; its own basis element c'
            // is the linear subspace of codimension c + c' in M
            let sub_dims: Vec<u32> = factors.iter().zip(c).map(|(n, c)| n - c).collect();
            let kept: Vec<usize> = (0..factors.len()).filter(|j| sub_dims[*j] > 0).collect();
            let sub_factors: Vec<u32> = kept.iter().map(|j| sub_dims[*j]).collect();
            let images: Vec<IntCombo> = basis_multi_indices(&sub_factors)
                .iter()
                .map(|cc| {
                    let mut full = c.clone();
                    for (k, j) in kept.iter().enumerate() {
                        full[*j] += cc[k];
                    }
                    IntCombo::from([(
                        basis.iter().position(|b| *b == full).expect("basis index"),
                        1,
                    )])
                })
                .collect();
            let within: BTreeSet<String> = basis
                .iter()
                .enumerate()
                .filter(|(k, b)| *k != i && b.iter().zip(c).all(|(x, y)| x >= y))
                .map(|(k, _)| all_names[k].clone())
                .collect();
            fiber.add(VarietyGenerator {
                name: all_names[i].clone(),
                compact_factors: sub_factors.clone(),
                affine_dim: 0,
                images: images.clone(),
                within: within.clone(),
            })?;
            ambient.add(VarietyGenerator {
                name: fam.ambient.generators()[i].name.clone(),
                compact_factors: sub_factors,
                affine_dim: 1,
                images,
                within: within
                    .iter()
                    .map(|w| {
                        if factors.is_empty() {
                            "A1".into()
                        } else {
                            format!("{w}xA1")
                        }
                    })
                    .collect(),
            })?;
        }
        let fiber = Arc::new(fiber);
        let ambient = Arc::new(ambient);
        let transforms = (1..basis.len())
            .map(|i| (i, MotivicClass::generator(&fiber, i)))
            .collect();
        let m_name = crate::genus::BuiltinSpace::product(factors).name();
        let components = vec![Component {
            name: "M0".into(),
            multiplicity: 1,
        }];
        let specs = vec![StratumSpec {
            components: vec![0],
            closure: 0,
            cover: None,
        }];
        Self::new(
            id,
            format!("{m_name}xA1"),
            "t",
            components,
            specs,
            fiber,
            ambient,
            fam.gysin,
            0,
            transforms,
            true,
            Some(factors.to_vec()),
        )
    }

    pub fn stratum_name(&self, s: &Stratum) -> String {
        self.fiber.generators()[s.closure].name.clone()
    }

    pub fn gcd(&self, s: &Stratum) -> i64 {
        s.components
            .iter()
            .fold(0i64, |acc, i| acc.gcd(&self.components[*i].multiplicity))
    }

    pub fn is_smooth_reduced(&self) -> bool {
        self.components.len() == 1 && self.components[0].multiplicity == 1
    }

    /// `[id_X]` over the ambient registry.
    pub fn identity_class(&self) -> MotivicClass {
        MotivicClass::generator(&self.ambient, self.identity)
    }

    /// `Psi'_f`, one term per stratum.
    pub fn nearby_terms(&self) -> Vec<MotivicClass> {
        self.strata
            .iter()
            .map(|s| s.cover.times_one_minus_l(s.components.len() as u32 - 1))
            .collect()
    }

    pub fn nearby_class(&self) -> MotivicClass {
        self.nearby_terms()
            .iter()
            .fold(MotivicClass::zero(&self.fiber), |acc, t| &acc + t)
    }

    /// `[i^*] = sum (-1)^{|I|-1} [E_I]`.
    pub fn i_star_class(&self) -> MotivicClass {
        let mut out = MotivicClass::zero(&self.fiber);
        for s in &self.strata {
            let sign = if s.components.len() % 2 == 1 { 1 } else { -1 };
            out = &out + &MotivicClass::generator(&self.fiber, s.closure).scale(sign);
        }
        out
    }

    /// `Phi'_f = Psi'_f - [i^*]`.
    pub fn vanishing_class(&self) -> MotivicClass {
        &self.nearby_class() - &self.i_star_class()
    }

    /// Nearby transform of an input class over `X`: `[id_X]` goes to
    /// `Psi'_f`, pulled-back generators to their declared restriction.
    pub fn nearby_transform(&self, input: &MotivicClass) -> Result<MotivicClass, NearbyError> {
        if **input.registry() != *self.ambient {
            return Err(NearbyError::Mismatch(
                "input class is not over the ambient space".into(),
            ));
        }
        let mut out = MotivicClass::zero(&self.fiber);
        let psi = self.nearby_class();
        for ((g, e), v) in input.terms() {
            let t = if g == self.identity {
                &psi
            } else {
                self.transforms.get(&g).ok_or_else(|| {
                    NearbyError::InputUnsupported(self.ambient.generators()[g].name.clone())
                })?
            };
            out = &out + &t.times_l(e).scale(v);
        }
        Ok(out)
    }

    /// `(chi(Psi'), sum_i m_i chi(E°_i), equal)`.
    pub fn acampo_check(&self) -> (i64, i64, bool) {
        let left = self.nearby_class().euler_of();
        let right = self
            .strata
            .iter()
            .filter(|s| s.components.len() == 1)
            .map(|s| self.components[s.components[0]].multiplicity * s.open.euler_of())
            .sum();
        (left, right, left == right)
    }
}

pub fn function_label(exponents: &[u32]) -> String {
    let n = exponents.len();
    let var = |i: usize| -> String {
        match n {
            1 => "t".into(),
            2 | 3 => ["x", "y", "z"][i].into(),
            _ => format!("x{}", i + 1),
        }
    };
    let parts: Vec<String> = exponents
        .iter()
        .enumerate()
        .filter(|(_, a)| **a > 0)
        .map(|(i, a)| {
            if *a == 1 {
                var(i)
            } else {
                format!("{}^{a}", var(i))
            }
        })
        .collect();
    parts.join("")
}
