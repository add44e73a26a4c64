//! Scenario files: a TOML document describing an ambient space, a function,
//! its divisor data and the K-theoretic tables needed to verify it.
//!
//! Built-in ambients (`affine`, `product`) derive their presentations; a
//! `user` ambient declares `[kgroups]`, `[[gysin]]`, `[varieties]` and
//! `[pushforward]` explicitly.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kgroup::{
    basis_multi_indices, stratum_name, GysinTable, IntCombo, KError, KGenerator, KPresentation,
};
use crate::motivic::{MotivicClass, MotivicError, Registry, TwistRule, VarietyGenerator};
use crate::nearby::{function_label, Component, NearbyError, SNCScenario, StratumSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("io error: {path}: {message}")]
    Io { path: String, message: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("cross-reference error: {0}")]
    CrossReference(String),
    #[error("invariant violation: {0}")]
    Invariant(String),
}

impl From<NearbyError> for ScenarioError {
    fn from(e: NearbyError) -> Self {
        match e {
            NearbyError::UnknownComponent(_) => ScenarioError::CrossReference(e.to_string()),
            NearbyError::Motivic(m) => m.into(),
            NearbyError::K(k) => k.into(),
            other => ScenarioError::Invariant(other.to_string()),
        }
    }
}

impl From<MotivicError> for ScenarioError {
    fn from(e: MotivicError) -> Self {
        match e {
            MotivicError::UnknownGenerator(_) => ScenarioError::CrossReference(e.to_string()),
            MotivicError::Parse(_) => ScenarioError::Schema(e.to_string()),
            MotivicError::K(k) => k.into(),
            other => ScenarioError::Invariant(other.to_string()),
        }
    }
}

impl From<KError> for ScenarioError {
    fn from(e: KError) -> Self {
        match e {
            KError::UnknownGenerator { .. } | KError::MissingGysinEntry { .. } => {
                ScenarioError::CrossReference(e.to_string())
            }
            other => ScenarioError::Invariant(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AmbientKind {
    Affine,
    Product,
    User,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionKind {
    Monomial,
    Projection,
    Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbientSection {
    pub kind: AmbientKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSection {
    pub kind: FunctionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivisorSection {
    pub components: Vec<String>,
    pub multiplicities: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StratumEntry {
    pub components: Vec<String>,
    /// Fiber variety generator whose image is the closed stratum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variety: Option<String>,
    /// Class of the unramified cover of the open stratum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub name: String,
    pub dim: u32,
    #[serde(default)]
    pub point_degree: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresentationSpec {
    pub name: String,
    pub generators: Vec<GeneratorSpec>,
    /// Integer combinations equal to zero, e.g. `"[U2] - [X0]"`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub relations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KGroupsSection {
    pub ambient: PresentationSpec,
    pub fiber: PresentationSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GysinEntry {
    pub source: String,
    pub image: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub in_fiber: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarietySpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub factors: Vec<u32>,
    #[serde(default)]
    pub affine_dim: u32,
    /// Images of the product-basis sheaves `[O_L]`, in basis order.
    pub images: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub within: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarietiesSection {
    pub ambient: Vec<VarietySpec>,
    pub fiber: Vec<VarietySpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformEntry {
    pub source: String,
    pub image: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PushforwardSection {
    /// Ambient variety standing for `[id_X]`.
    pub input: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transforms: Vec<TransformEntry>,
}

/// Rendered classes pinned for regression, under `convention`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExpectSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<TwistRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nearby: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lhs: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defect: Option<String>,
    /// `[euler(Psi'), sum m_i chi(E°_i)]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acampo: Option<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub ambient: AmbientSection,
    pub function: FunctionSection,
    pub divisor: DivisorSection,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub strata: Vec<StratumEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kgroups: Option<KGroupsSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gysin: Vec<GysinEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub varieties: Option<VarietiesSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pushforward: Option<PushforwardSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<ExpectSection>,
}

fn schema(msg: impl fmt::Display) -> ScenarioError {
    ScenarioError::Schema(msg.to_string())
}

fn xref(msg: impl fmt::Display) -> ScenarioError {
    ScenarioError::CrossReference(msg.to_string())
}

fn invariant(msg: impl fmt::Display) -> ScenarioError {
    ScenarioError::Invariant(msg.to_string())
}

/// Parse and validate a scenario file.
pub fn parse_scenario(path: impl AsRef<Path>) -> Result<SNCScenario, ScenarioError> {
    ScenarioFile::load(path)?.build()
}

/// Parse `"[A] - 2*[B]"` (or `"0"`) into generator-name coefficients.
pub fn parse_int_combo(text: &str) -> Result<Vec<(String, i64)>, ScenarioError> {
    let err = || schema(format!("cannot parse integer class `{text}`"));
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact == "0" {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
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
        let open = body.find('[').ok_or_else(err)?;
        let close = body.find(']').ok_or_else(err)?;
        if close < open {
            return Err(err());
        }
        let coeff = match &body[..open] {
            "" => 1,
            c => c
                .strip_suffix('*')
                .ok_or_else(err)?
                .parse::<i64>()
                .map_err(|_| err())?,
        };
        let name = &body[open + 1..close];
        if name.is_empty() {
            return Err(err());
        }
        out.push((name.to_string(), sign * coeff));
        rest = &body[close + 1..];
    }
    Ok(out)
}

/// Inverse of [`parse_int_combo`].
pub fn render_int_combo(pres: &KPresentation, combo: &IntCombo) -> String {
    let mut out = String::new();
    for (&g, &c) in combo {
        let name = &pres.generators()[g].name;
        let (sign, abs) = if c < 0 { ("-", -c) } else { ("+", c) };
        if out.is_empty() {
            if sign == "-" {
                out.push('-');
            }
        } else {
            out.push_str(&format!(" {sign} "));
        }
        if abs != 1 {
            out.push_str(&format!("{abs}*"));
        }
        out.push_str(&format!("[{name}]"));
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}

fn combo_in(pres: &KPresentation, text: &str, context: &str) -> Result<IntCombo, ScenarioError> {
    let mut combo = IntCombo::new();
    for (name, c) in parse_int_combo(text)? {
        let g = pres
            .generator_index(&name)
            .map_err(|e| xref(format!("{context}: {e}")))?;
        let v = combo.entry(g).or_insert(0);
        *v += c;
        if *v == 0 {
            combo.remove(&g);
        }
    }
    Ok(combo)
}

impl ScenarioFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| schema(e.message().trim_end()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario documents serialize")
    }

    fn check_divisor(&self) -> Result<Vec<Component>, ScenarioError> {
        let d = &self.divisor;
        if d.components.len() != d.multiplicities.len() {
            return Err(schema(format!(
                "divisor: {} components but {} multiplicities",
                d.components.len(),
                d.multiplicities.len()
            )));
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (name, m) in d.components.iter().zip(&d.multiplicities) {
            if !seen.insert(name) {
                return Err(schema(format!("divisor: duplicate component `{name}`")));
            }
            if *m <= 0 {
                return Err(NearbyError::NonPositiveMultiplicity(name.clone()).into());
            }
            out.push(Component {
                name: name.clone(),
                multiplicity: *m,
            });
        }
        Ok(out)
    }

    fn stratum_indices(&self, components: &[Component]) -> Result<Vec<Vec<usize>>, ScenarioError> {
        let mut out = Vec::new();
        for (k, s) in self.strata.iter().enumerate() {
            let mut idx = Vec::new();
            for c in &s.components {
                let i = components
                    .iter()
                    .position(|x| x.name == *c)
                    .ok_or_else(|| xref(format!("strata[{k}]: undeclared component `{c}`")))?;
                idx.push(i);
            }
            idx.sort_unstable();
            out.push(idx);
        }
        Ok(out)
    }

    fn forbid_explicit_tables(&self) -> Result<(), ScenarioError> {
        let present = [
            ("kgroups", self.kgroups.is_some()),
            ("gysin", !self.gysin.is_empty()),
            ("varieties", self.varieties.is_some()),
            ("pushforward", self.pushforward.is_some()),
        ];
        match present.iter().find(|(_, p)| *p) {
            Some((name, _)) => Err(schema(format!(
                "section `{name}` requires ambient.kind = \"user\""
            ))),
            None => Ok(()),
        }
    }

    /// Validate every cross-reference and invariant and build the scenario.
    pub fn build(&self) -> Result<SNCScenario, ScenarioError> {
        let components = self.check_divisor()?;
        match self.ambient.kind {
            AmbientKind::Affine => self.build_affine(&components),
            AmbientKind::Product => self.build_product(&components),
            AmbientKind::User => self.build_user(components),
        }
    }

    fn build_affine(&self, components: &[Component]) -> Result<SNCScenario, ScenarioError> {
        self.forbid_explicit_tables()?;
        let dim = self
            .ambient
            .dim
            .ok_or_else(|| schema("ambient: `dim` is required for kind = \"affine\""))?;
        if self.function.kind != FunctionKind::Monomial {
            return Err(schema("function: affine ambients take kind = \"monomial\""));
        }
        let exponents = self
            .function
            .exponents
            .clone()
            .ok_or_else(|| schema("function: `exponents` is required for monomials"))?;
        if exponents.len() != dim as usize {
            return Err(invariant(format!(
                "function: {} exponents on an ambient of dimension {dim}",
                exponents.len()
            )));
        }
        let expected: Vec<(String, i64)> = exponents
            .iter()
            .enumerate()
            .filter(|(_, a)| **a > 0)
            .map(|(i, a)| (format!("E{}", i + 1), i64::from(*a)))
            .collect();
        let declared: Vec<(String, i64)> = components
            .iter()
            .map(|c| (c.name.clone(), c.multiplicity))
            .collect();
        if declared != expected {
            return Err(invariant(format!(
                "divisor: components {declared:?} do not match the exponents of {}; expected {expected:?}",
                function_label(&exponents)
            )));
        }
        let subsets = self.stratum_indices(components)?;
        let coords: Vec<usize> = (0..exponents.len()).filter(|i| exponents[*i] > 0).collect();
        let mut covers = Vec::new();
        for (entry, subset) in self.strata.iter().zip(&subsets) {
            if let Some(v) = &entry.variety {
                let coord_subset: Vec<usize> = subset.iter().map(|i| coords[*i]).collect();
                let name = stratum_name(exponents.len(), &coord_subset);
                if *v != name {
                    return Err(xref(format!(
                        "stratum {:?}: variety `{v}` is not `{name}`",
                        entry.components
                    )));
                }
            }
            if let Some(c) = &entry.cover {
                covers.push((subset.clone(), c.clone()));
            }
        }
        let s = SNCScenario::affine_monomial(&self.id, &exponents, &covers)?;
        let built: BTreeSet<Vec<usize>> = s.strata.iter().map(|t| t.components.clone()).collect();
        let listed: BTreeSet<Vec<usize>> = subsets.into_iter().collect();
        if listed.len() != self.strata.len() {
            return Err(invariant("strata: duplicate stratum"));
        }
        if let Some(missing) = built.difference(&listed).next() {
            let names: Vec<&str> = missing
                .iter()
                .map(|i| components[*i].name.as_str())
                .collect();
            return Err(invariant(format!(
                "strata: intersection {names:?} is not declared"
            )));
        }
        if let Some(extra) = listed.difference(&built).next() {
            let names: Vec<&str> = extra.iter().map(|i| components[*i].name.as_str()).collect();
            return Err(invariant(format!(
                "strata: {names:?} is empty in this arrangement"
            )));
        }
        Ok(s)
    }

    fn build_product(&self, components: &[Component]) -> Result<SNCScenario, ScenarioError> {
        self.forbid_explicit_tables()?;
        let factors = self
            .ambient
            .factors
            .clone()
            .ok_or_else(|| schema("ambient: `factors` is required for kind = \"product\""))?;
        if factors.contains(&0) {
            return Err(invariant(
                "ambient: projective factors must have positive dimension",
            ));
        }
        if self.function.kind != FunctionKind::Projection {
            return Err(schema(
                "function: product ambients take kind = \"projection\"",
            ));
        }
        if components.len() != 1 || components[0].multiplicity != 1 {
            return Err(invariant("divisor: a projection has one reduced component"));
        }
        self.stratum_indices(components)?;
        if self.strata.iter().any(|s| s.cover.is_some()) {
            return Err(invariant("strata: a reduced fiber takes no cover data"));
        }
        let mut s = SNCScenario::product_family(&self.id, &factors)?;
        s.components[0].name = components[0].name.clone();
        Ok(s)
    }

    fn build_user(&self, components: Vec<Component>) -> Result<SNCScenario, ScenarioError> {
        let kg = self
            .kgroups
            .as_ref()
            .ok_or_else(|| schema("section `kgroups` is required for ambient.kind = \"user\""))?;
        let vars = self
            .varieties
            .as_ref()
            .ok_or_else(|| schema("section `varieties` is required for ambient.kind = \"user\""))?;
        let push = self.pushforward.as_ref().ok_or_else(|| {
            schema("section `pushforward` is required for ambient.kind = \"user\"")
        })?;
        let ambient_k = Arc::new(build_presentation(&kg.ambient, "kgroups.ambient")?);
        let fiber_k = Arc::new(build_presentation(&kg.fiber, "kgroups.fiber")?);

        let mut images: Vec<Option<IntCombo>> = vec![None; ambient_k.generators().len()];
        let mut in_fiber = vec![false; ambient_k.generators().len()];
        for (k, e) in self.gysin.iter().enumerate() {
            let g = ambient_k
                .generator_index(&e.source)
                .map_err(|err| xref(format!("gysin[{k}]: {err}")))?;
            if images[g].is_some() {
                return Err(schema(format!("gysin: duplicate entry for `{}`", e.source)));
            }
            images[g] = Some(combo_in(&fiber_k, &e.image, &format!("gysin[{k}]"))?);
            in_fiber[g] = e.in_fiber;
        }
        let gysin = GysinTable::new(ambient_k.clone(), fiber_k.clone(), images, in_fiber)?;

        let fiber = Arc::new(build_registry(&fiber_k, &vars.fiber, "varieties.fiber")?);
        let ambient = Arc::new(build_registry(
            &ambient_k,
            &vars.ambient,
            "varieties.ambient",
        )?);

        let subsets = self.stratum_indices(&components)?;
        let mut specs = Vec::new();
        for (k, (entry, subset)) in self.strata.iter().zip(subsets).enumerate() {
            let v = entry
                .variety
                .as_ref()
                .ok_or_else(|| schema(format!("strata[{k}]: `variety` is required")))?;
            let closure = fiber
                .index(v)
                .map_err(|e| xref(format!("strata[{k}]: {e}")))?;
            let cover = match &entry.cover {
                Some(text) => Some(
                    MotivicClass::parse(&fiber, text)
                        .map_err(|e| prefixed(format!("strata[{k}]"), e.into()))?,
                ),
                None => None,
            };
            specs.push(StratumSpec {
                components: subset,
                closure,
                cover,
            });
        }
        let identity = ambient
            .index(&push.input)
            .map_err(|e| xref(format!("pushforward.input: {e}")))?;
        let mut transforms = BTreeMap::new();
        for (k, t) in push.transforms.iter().enumerate() {
            let g = ambient
                .index(&t.source)
                .map_err(|e| xref(format!("pushforward.transforms[{k}]: {e}")))?;
            let image = MotivicClass::parse(&fiber, &t.image)
                .map_err(|e| prefixed(format!("pushforward.transforms[{k}]"), e.into()))?;
            if transforms.insert(g, image).is_some() {
                return Err(schema(format!(
                    "pushforward: duplicate transform for `{}`",
                    t.source
                )));
            }
        }
        let ambient_label = self
            .ambient
            .label
            .clone()
            .unwrap_or_else(|| ambient_k.name().to_string());
        let function_label = match (
            self.function.kind,
            &self.function.label,
            &self.function.exponents,
        ) {
            (_, Some(l), _) => l.clone(),
            (FunctionKind::Monomial, None, Some(e)) => function_label(e),
            (FunctionKind::Projection, None, _) => "t".into(),
            _ => return Err(schema("function: `label` or `exponents` is required")),
        };
        Ok(SNCScenario::new(
            self.id.clone(),
            ambient_label,
            function_label,
            components,
            specs,
            fiber,
            ambient,
            gysin,
            identity,
            transforms,
            false,
            None,
        )?)
    }

    /// An equivalent `user` document spelling out every table of `s`.
    pub fn explicit(s: &SNCScenario) -> Self {
        let pres_spec = |p: &KPresentation| PresentationSpec {
            name: p.name().to_string(),
            generators: p
                .generators()
                .iter()
                .map(|g| GeneratorSpec {
                    name: g.name.clone(),
                    dim: g.dim,
                    point_degree: g.point_degree,
                })
                .collect(),
            relations: p
                .relations()
                .iter()
                .map(|r| render_int_combo(p, r))
                .collect(),
        };
        let var_specs = |r: &Registry| -> Vec<VarietySpec> {
            r.generators()
                .iter()
                .map(|g| VarietySpec {
                    name: g.name.clone(),
                    factors: g.compact_factors.clone(),
                    affine_dim: g.affine_dim,
                    images: g
                        .images
                        .iter()
                        .map(|c| render_int_combo(r.base(), c))
                        .collect(),
                    within: g.within.iter().cloned().collect(),
                })
                .collect()
        };
        let source = s.gysin.source();
        let gysin = (0..source.generators().len())
            .map(|g| GysinEntry {
                source: source.generators()[g].name.clone(),
                image: render_int_combo(s.gysin.target(), s.gysin.image(g)),
                in_fiber: s.gysin.in_fiber(g),
            })
            .collect();
        let strata = s
            .strata
            .iter()
            .map(|t| StratumEntry {
                components: t
                    .components
                    .iter()
                    .map(|i| s.components[*i].name.clone())
                    .collect(),
                variety: Some(s.fiber.generators()[t.closure].name.clone()),
                cover: (s.gcd(t) > 1).then(|| t.cover.render()),
            })
            .collect();
        ScenarioFile {
            id: s.id.clone(),
            description: None,
            ambient: AmbientSection {
                kind: AmbientKind::User,
                dim: None,
                factors: None,
                label: Some(s.ambient_label.clone()),
            },
            function: FunctionSection {
                kind: FunctionKind::Label,
                exponents: None,
                label: Some(s.function_label.clone()),
            },
            divisor: DivisorSection {
                components: s.components.iter().map(|c| c.name.clone()).collect(),
                multiplicities: s.components.iter().map(|c| c.multiplicity).collect(),
            },
            strata,
            kgroups: Some(KGroupsSection {
                ambient: pres_spec(source),
                fiber: pres_spec(s.gysin.target()),
            }),
            gysin,
            varieties: Some(VarietiesSection {
                ambient: var_specs(&s.ambient),
                fiber: var_specs(&s.fiber),
            }),
            pushforward: Some(PushforwardSection {
                input: s.ambient.generators()[s.identity].name.clone(),
                transforms: s
                    .transforms
                    .iter()
                    .map(|(g, c)| TransformEntry {
                        source: s.ambient.generators()[*g].name.clone(),
                        image: c.render(),
                    })
                    .collect(),
            }),
            expect: None,
        }
    }
}

fn prefixed(context: String, e: ScenarioError) -> ScenarioError {
    match e {
        ScenarioError::CrossReference(m) => xref(format!("{context}: {m}")),
        ScenarioError::Schema(m) => schema(format!("{context}: {m}")),
        ScenarioError::Invariant(m) => invariant(format!("{context}: {m}")),
        io => io,
    }
}

fn build_presentation(
    spec: &PresentationSpec,
    context: &str,
) -> Result<KPresentation, ScenarioError> {
    let gens: Vec<KGenerator> = spec
        .generators
        .iter()
        .map(|g| KGenerator::new(g.name.clone(), g.dim, g.point_degree))
        .collect();
    let mut rels = Vec::new();
    for text in &spec.relations {
        rels.push(parse_int_combo(text)?);
    }
    KPresentation::from_named(spec.name.clone(), gens, &rels)
        .map_err(|e| prefixed(context.into(), e.into()))
}

fn build_registry(
    base: &Arc<KPresentation>,
    specs: &[VarietySpec],
    context: &str,
) -> Result<Registry, ScenarioError> {
    let names: BTreeSet<&str> = specs.iter().map(|v| v.name.as_str()).collect();
    let mut reg = Registry::new(base.clone());
    for v in specs {
        let expected = basis_multi_indices(&v.factors).len();
        if v.images.len() != expected {
            return Err(invariant(format!(
                "{context}.{}: {} images given, the basis of {:?} has {expected}",
                v.name,
                v.images.len(),
                v.factors
            )));
        }
        if let Some(w) = v.within.iter().find(|w| !names.contains(w.as_str())) {
            return Err(xref(format!(
                "{context}.{}: `within` names undeclared variety `{w}`",
                v.name
            )));
        }
        let images = v
            .images
            .iter()
            .map(|t| combo_in(base, t, &format!("{context}.{}", v.name)))
            .collect::<Result<Vec<_>, _>>()?;
        reg.add(VarietyGenerator {
            name: v.name.clone(),
            compact_factors: v.factors.clone(),
            affine_dim: v.affine_dim,
            images,
            within: v.within.iter().cloned().collect(),
        })
        .map_err(|e| prefixed(context.into(), e.into()))?;
    }
    Ok(reg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const NODE: &str = r#"
id = "node"

[ambient]
kind = "affine"
dim = 2

[function]
kind = "monomial"
exponents = [1, 1]

[divisor]
components = ["E1", "E2"]
multiplicities = [1, 1]

[[strata]]
components = ["E1"]

[[strata]]
components = ["E2"]

[[strata]]
components = ["E1", "E2"]
variety = "pt"
"#;

    #[test]
    fn node_document() {
        let f = ScenarioFile::from_toml(NODE).unwrap();
        let s = f.build().unwrap();
        assert_eq!(
            s,
            SNCScenario::affine_monomial("node", &[1, 1], &[]).unwrap()
        );
        assert_eq!(ScenarioFile::from_toml(&f.to_toml()).unwrap(), f);
    }

    #[test]
    fn error_categories() {
        let zero = NODE.replace("multiplicities = [1, 1]", "multiplicities = [0, 1]");
        let e = ScenarioFile::from_toml(&zero).unwrap().build().unwrap_err();
        assert!(matches!(e, ScenarioError::Invariant(_)));
        assert!(
            e.to_string().contains("multiplicity must be positive"),
            "{e}"
        );

        let undeclared = NODE.replace(
            "components = [\"E1\", \"E2\"]\nvariety",
            "components = [\"E1\", \"E3\"]\nvariety",
        );
        let e = ScenarioFile::from_toml(&undeclared)
            .unwrap()
            .build()
            .unwrap_err();
        assert!(matches!(e, ScenarioError::CrossReference(_)), "{e}");

        let e = ScenarioFile::from_toml(&NODE.replace("kind = \"affine\"", "kind = \"torus\""))
            .unwrap_err();
        assert!(matches!(e, ScenarioError::Schema(_)), "{e}");

        let missing = NODE.replace(
            "[[strata]]\ncomponents = [\"E1\", \"E2\"]\nvariety = \"pt\"\n",
            "",
        );
        let e = ScenarioFile::from_toml(&missing)
            .unwrap()
            .build()
            .unwrap_err();
        assert!(matches!(e, ScenarioError::Invariant(_)), "{e}");

        let e = ScenarioFile::load("/nonexistent/x.scn").unwrap_err();
        assert!(matches!(e, ScenarioError::Io { .. }));
    }

    #[test]
    fn int_combo_round_trip() {
        let p = KPresentation::point();
        assert_eq!(
            parse_int_combo("[A] - 2*[B] + [C]").unwrap(),
            vec![("A".into(), 1), ("B".into(), -2), ("C".into(), 1)]
        );
        assert_eq!(parse_int_combo("0").unwrap(), vec![]);
        assert!(parse_int_combo("[A] 2*[B]").is_err());
        let c = IntCombo::from([(0, -3)]);
        assert_eq!(render_int_combo(&p, &c), "-3*[pt]");
    }

    #[test]
    fn explicit_documents_agree() {
        let cases = vec![
            SNCScenario::affine_monomial("node", &[1, 1], &[]).unwrap(),
            SNCScenario::affine_monomial("t2", &[2], &[(vec![0], "2*[pt]".into())]).unwrap(),
            SNCScenario::product_family("p1", &[1]).unwrap(),
        ];
        for s in cases {
            let doc = ScenarioFile::explicit(&s);
            let text = doc.to_toml();
            let back = ScenarioFile::from_toml(&text).unwrap();
            assert_eq!(back, doc);
            let u = back.build().unwrap();
            assert!(!u.builtin);
            assert_eq!(u.nearby_class().render(), s.nearby_class().render());
            for rule in TwistRule::ALL {
                let a = crate::verify::check_identity(&s, rule).unwrap();
                let b = crate::verify::check_identity(&u, rule).unwrap();
                assert_eq!(a.defect.render(), b.defect.render());
                assert_eq!(a.lhs.render(), b.lhs.render());
            }
        }
    }
}
