//! Versioned JSON input documents.
//!
//! Every number is a string holding an exact value (`"3"`, `"3.25"` or
//! `"13/4"`), so nothing passes through floating point on the way in.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use toc_core::ceiling::AuthoritySpec;
use toc_core::exact::{fraction_string, parse_rational};
use toc_core::falsepos::{FixedFractionModel, PrecisionFunction};
use toc_core::{validate_pipeline, RawPipeline, Rational, RationalMultiplier, RationalPipeline};
use toc_core::{Multiplier, RationalAuthority, RationalFixedFraction, RationalPrecision};

use crate::CliError;

pub const FORMAT_VERSION: &str = "1";

/// Built-in scenario name resolving to the all-ones multiplier.
pub const IDENTITY_SCENARIO: &str = "identity";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineDocument {
    pub format_version: String,
    pub pipeline: PipelineSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub authority: Option<AuthoritySection>,
    /// Named multipliers; stages left out of a scenario keep factor 1.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub scenarios: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSection {
    pub name: String,
    pub stages: Vec<StageRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageRecord {
    pub id: String,
    pub capacity: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuthoritySection {
    pub human: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assist_bounds: Option<BTreeMap<String, String>>,
}

fn number(field: String, text: &str) -> Result<Rational, CliError> {
    parse_rational(text).map_err(|_| CliError::Schema(format!("{field}: `{text}` is not an exact number")))
}

fn check_version(found: &str) -> Result<(), CliError> {
    if found == FORMAT_VERSION {
        Ok(())
    } else {
        Err(CliError::Schema(format!(
            "unsupported format_version `{found}` (expected `{FORMAT_VERSION}`)"
        )))
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

impl PipelineDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc: PipelineDocument = serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
        check_version(&doc.format_version)?;
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::parse(&read(path)?)
    }

    /// Document describing `pipeline` with exact fraction strings.
    pub fn from_pipeline(name: &str, pipeline: &RationalPipeline) -> Self {
        PipelineDocument {
            format_version: FORMAT_VERSION.into(),
            pipeline: PipelineSection {
                name: name.into(),
                stages: pipeline
                    .iter()
                    .map(|(id, c)| StageRecord {
                        id: id.to_string(),
                        capacity: fraction_string(c),
                    })
                    .collect(),
            },
            authority: None,
            scenarios: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("documents always serialise");
        out.push('\n');
        out
    }

    /// The validated pipeline; every broken invariant is listed.
    pub fn pipeline(&self) -> Result<RationalPipeline, CliError> {
        let mut raw = RawPipeline::default();
        for (i, record) in self.pipeline.stages.iter().enumerate() {
            raw.stages.push(record.id.clone());
            let capacity = number(format!("pipeline.stages[{i}].capacity"), &record.capacity)?;
            raw.capacities.push((record.id.clone(), capacity));
        }
        validate_pipeline(raw).map_err(CliError::Validation)
    }

    pub fn authority(&self) -> Result<Option<RationalAuthority>, CliError> {
        let Some(section) = &self.authority else {
            return Ok(None);
        };
        let spec = AuthoritySpec::new(section.human.iter().map(String::as_str));
        let Some(bounds) = &section.assist_bounds else {
            return Ok(Some(spec));
        };
        let parsed = bounds
            .iter()
            .map(|(id, b)| Ok((id.as_str(), number(format!("authority.assist_bounds.{id}"), b)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(Some(spec.with_assist_bounds(parsed)?))
    }

    pub fn scenario_names(&self) -> impl Iterator<Item = &str> {
        self.scenarios.keys().map(String::as_str)
    }

    /// The named scenario over `pipeline`; `identity` is always available.
    pub fn scenario(&self, name: &str, pipeline: &RationalPipeline) -> Result<RationalMultiplier, CliError> {
        let Some(entries) = self.scenarios.get(name) else {
            if name == IDENTITY_SCENARIO {
                return Ok(Multiplier::identity(pipeline));
            }
            return Err(CliError::UnknownScenario(name.to_string()));
        };
        let factors = entries
            .iter()
            .map(|(id, f)| Ok((id.as_str(), number(format!("scenarios.{name}.{id}"), f)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(Multiplier::with_overrides(pipeline, factors)?)
    }
}

/// Input for the `fp` subcommand.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FalsePositiveDocument {
    pub format_version: String,
    /// Optional stage name the alert rate refers to; used for labelling only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub false_positive_fraction: String,
    pub investigation_capacity: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<PrecisionSection>,
    pub samples: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PrecisionSection {
    Constant { value: String },
    RationalDecay { rate: String },
    ExponentialDecay { rate: String },
    Table { breakpoints: Vec<(String, String)> },
}

impl FalsePositiveDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc: FalsePositiveDocument = serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
        check_version(&doc.format_version)?;
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::parse(&read(path)?)
    }

    pub fn model(&self) -> Result<RationalFixedFraction, CliError> {
        Ok(FixedFractionModel::new(
            number("false_positive_fraction".into(), &self.false_positive_fraction)?,
            number("investigation_capacity".into(), &self.investigation_capacity)?,
        )?)
    }

    pub fn precision(&self) -> Result<Option<RationalPrecision>, CliError> {
        let Some(section) = &self.precision else {
            return Ok(None);
        };
        let p = match section {
            PrecisionSection::Constant { value } => PrecisionFunction::constant(number("precision.value".into(), value)?)?,
            PrecisionSection::RationalDecay { rate } => {
                PrecisionFunction::rational_decay(number("precision.rate".into(), rate)?)?
            }
            PrecisionSection::ExponentialDecay { rate } => {
                PrecisionFunction::exponential_decay(number("precision.rate".into(), rate)?)?
            }
            PrecisionSection::Table { breakpoints } => PrecisionFunction::table(
                breakpoints
                    .iter()
                    .enumerate()
                    .map(|(i, (r, p))| {
                        Ok((
                            number(format!("precision.breakpoints[{i}][0]"), r)?,
                            number(format!("precision.breakpoints[{i}][1]"), p)?,
                        ))
                    })
                    .collect::<Result<Vec<_>, CliError>>()?,
            )?,
        };
        Ok(Some(p))
    }

    pub fn samples(&self) -> Result<Vec<Rational>, CliError> {
        self.samples
            .iter()
            .enumerate()
            .map(|(i, s)| number(format!("samples[{i}]"), s))
            .collect()
    }
}
