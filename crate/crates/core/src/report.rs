//! Conventions file and machine-readable reports.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kgroup::KClass;
use crate::motivic::TwistRule;
use crate::verify::{Calibration, Shadow, VerificationReport};
use crate::Rational;

/// Environment variable naming a directory that receives a copy of every
/// JSON report.
pub const REPORT_DIR_ENV: &str = "MHC_REPORT_DIR";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConventionsError {
    #[error("io error: {path}: {message}")]
    Io { path: String, message: String },
    #[error("schema error: conventions file: {0}")]
    Schema(String),
}

/// Output of `calibrate`, read by every later run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Conventions {
    pub twist: TwistRule,
    pub calibrated_on: String,
    pub defects: ConventionDefects,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConventionDefects {
    pub naive: String,
    pub shifted: String,
}

impl Conventions {
    pub fn from_calibration(c: &Calibration) -> Self {
        Conventions {
            twist: c.chosen,
            calibrated_on: c.scenario.clone(),
            defects: ConventionDefects {
                naive: c.naive.defect.render(),
                shifted: c.shifted.defect.render(),
            },
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConventionsError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ConventionsError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        toml::from_str(&text)
            .map_err(|e| ConventionsError::Schema(e.message().trim_end().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("conventions serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShadowJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<String>,
    pub agree: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pole: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcampoJson {
    pub nearby_euler: i64,
    pub component_sum: i64,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyJson {
    pub lhs: String,
    pub rhs: String,
    pub pass: bool,
    pub normalized_denominator: u32,
    pub normalized_pass: bool,
}

/// Generator-wise values at a rational `y`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationJson {
    pub y: String,
    pub lhs: Vec<(String, String)>,
    pub rhs: Vec<(String, String)>,
    pub defect: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub ambient: String,
    pub function: String,
    pub convention: TwistRule,
    pub completeness: String,
    pub lhs: String,
    pub rhs: String,
    pub defect: String,
    pub pass: bool,
    pub divisible: bool,
    pub shadow: ShadowJson,
    pub acampo: AcampoJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homology: Option<HomologyJson>,
    /// Agreement of the lambda_y route with both sides, for product families.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smooth_case: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluation: Option<EvaluationJson>,
    /// Mismatches against the scenario's `[expect]` section.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expect_mismatches: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<String>,
}

impl ScenarioReport {
    pub fn from_report(r: &VerificationReport, ambient: &str, function: &str) -> Self {
        let shadow = match &r.shadow {
            Shadow::Values { left, right, agree } => ShadowJson {
                left: Some(left.to_string()),
                right: Some(right.to_string()),
                agree: *agree,
                pole: None,
            },
            Shadow::Pole(msg) => ShadowJson {
                left: None,
                right: None,
                agree: false,
                pole: Some(msg.clone()),
            },
        };
        ScenarioReport {
            scenario: r.scenario.clone(),
            ambient: ambient.into(),
            function: function.into(),
            convention: r.convention,
            completeness: r.completeness.into(),
            lhs: r.lhs.render(),
            rhs: r.rhs.render(),
            defect: r.defect.render(),
            pass: r.pass,
            divisible: r.divisible,
            shadow,
            acampo: AcampoJson {
                nearby_euler: r.acampo.0,
                component_sum: r.acampo.1,
                agree: r.acampo.2,
            },
            homology: r.homology.as_ref().map(|h| HomologyJson {
                lhs: h.lhs.to_string(),
                rhs: h.rhs.to_string(),
                pass: h.pass,
                normalized_denominator: h.normalized_denominator,
                normalized_pass: h.normalized_pass,
            }),
            smooth_case: None,
            evaluation: None,
            expect_mismatches: Vec::new(),
            duration_ms: None,
        }
    }

    /// All checks in the report hold.
    pub fn ok(&self) -> bool {
        self.pass
            && self.divisible
            && self.shadow.agree
            && self.acampo.agree
            && self
                .homology
                .as_ref()
                .is_none_or(|h| h.pass && h.normalized_pass)
            && self.smooth_case != Some(false)
            && self.expect_mismatches.is_empty()
    }
}

pub fn evaluation(r: &VerificationReport, y0: &Rational) -> EvaluationJson {
    let eval = |k: &KClass<Rational>| -> Vec<(String, String)> {
        k.terms()
            .map(|(g, c)| {
                let value = c
                    .eval_at(y0)
                    .map(|v| v.to_string())
                    .unwrap_or_else(|_| "pole".into());
                (k.presentation().generators()[g].name.clone(), value)
            })
            .collect()
    };
    EvaluationJson {
        y: y0.to_string(),
        lhs: eval(&r.lhs),
        rhs: eval(&r.rhs),
        defect: eval(&r.defect),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub convention: TwistRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibrated_on: Option<String>,
    pub scenarios: Vec<ScenarioReport>,
    pub summary: Summary,
}

impl ReportDocument {
    pub fn new(
        convention: TwistRule,
        calibrated_on: Option<String>,
        scenarios: Vec<ScenarioReport>,
    ) -> Self {
        let passed = scenarios.iter().filter(|s| s.ok()).count();
        let summary = Summary {
            total: scenarios.len(),
            passed,
            failed: scenarios.len() - passed,
            duration_ms: None,
        };
        ReportDocument {
            convention,
            calibrated_on,
            scenarios,
            summary,
        }
    }

    pub fn all_ok(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Milliseconds with microsecond precision, as an exact decimal string.
pub fn millis(d: std::time::Duration) -> String {
    let us = d.as_micros();
    format!("{}.{:03}", us / 1000, us % 1000)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nearby::SNCScenario;
    use crate::verify::{calibrate, check_identity};

    #[test]
    fn conventions_round_trip() {
        let node = SNCScenario::affine_monomial("node", &[1, 1], &[]).unwrap();
        let c = Conventions::from_calibration(&calibrate(&node).unwrap());
        assert_eq!(c.twist, TwistRule::Shifted);
        assert_eq!(c.defects.shifted, "0");
        assert_eq!(c.defects.naive, "(2*y + 2*y^2)*[O_pt]");
        let back: Conventions = toml::from_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn document_round_trip_and_stability() {
        let make = || {
            let s = SNCScenario::product_family("p1", &[1]).unwrap();
            let r = check_identity(&s, TwistRule::Shifted).unwrap();
            let mut j = ScenarioReport::from_report(&r, &s.ambient_label, &s.function_label);
            j.evaluation = Some(evaluation(&r, &Rational::new(1.into(), 2.into())));
            ReportDocument::new(TwistRule::Shifted, Some("node".into()), vec![j])
        };
        let doc = make();
        assert!(doc.all_ok());
        let text = doc.to_json();
        assert_eq!(ReportDocument::from_json(&text).unwrap(), doc);
        assert_eq!(make().to_json(), text);
        assert!(text.contains("\"y\": \"1/2\""));
    }

    #[test]
    fn millis_format() {
        assert_eq!(millis(std::time::Duration::from_micros(12_345)), "12.345");
    }
}
