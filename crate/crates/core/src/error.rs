use std::fmt;

use crate::model::{StageId, ValidationReport};

/// Which member of an attacker/defender pair an error belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Attacker,
    Defender,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Attacker => "attacker",
            Side::Defender => "defender",
        })
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid pipeline: {0}")]
    InvalidPipeline(ValidationReport),

    #[error("`{0}` is not an exact number (expected forms: 3, 3.25, 13/4)")]
    BadNumber(String),

    #[error("factor {factor} for stage `{stage}` is below 1 (Assumption 5)")]
    FactorBelowOne { stage: StageId, factor: String },

    #[error("factor for stage `{0}` is not finite (Assumption 5)")]
    NonFiniteFactor(StageId),

    #[error("multiplier lists stage `{0}` more than once")]
    DuplicateFactor(StageId),

    #[error("multiplier has no factor for stage `{0}`")]
    MissingFactor(StageId),

    #[error("multiplier names stage `{0}`, which is not in the pipeline")]
    UnknownFactorStage(StageId),

    #[error("{side}: {source}")]
    Side {
        side: Side,
        #[source]
        source: Box<Error>,
    },

    #[error("human ceiling is undefined for an empty human stage set")]
    EmptyHumanSet,

    #[error("human stage `{0}` is not in the pipeline")]
    UnknownHumanStage(StageId),

    #[error("generalised ceiling needs assist bounds on the human stages")]
    MissingAssistBounds,

    #[error("assist bound {value} for stage `{stage}` is below 1")]
    AssistBoundBelowOne { stage: StageId, value: String },

    #[error("assist bounds must cover exactly the human stages; offending stage `{0}`")]
    AssistDomain(StageId),

    #[error("alert rate {0} must be strictly positive")]
    NonPositiveRate(String),

    #[error("false-positive fraction {0} must lie in [0, 1)")]
    FractionOutOfRange(String),

    #[error("investigation capacity {0} must be strictly positive")]
    NonPositiveInvestigationCapacity(String),

    #[error("invalid precision function: {0}")]
    InvalidPrecision(String),

    #[error("rate {rate} lies outside the table span [{low}, {high}]")]
    OutsideTable { rate: String, low: String, high: String },

    #[error("sample {sample} does not exceed the investigation capacity {capacity}")]
    SampleNotAboveCapacity { sample: String, capacity: String },

    #[error("samples must be strictly increasing; violated at position {0}")]
    SamplesNotIncreasing(usize),

    #[error("precision function is not strictly decreasing above the investigation capacity (Assumption 8): {0}")]
    NotStrictlyDecreasing(String),

    #[error("{count} tied bottlenecks; the single-bottleneck allocation does not apply, use the max-min allocator")]
    TiedBottlenecks { count: usize },

    #[error("tolerance {0} must be strictly positive")]
    NonPositiveTolerance(String),

    #[error("budget {0} must be nonnegative")]
    NegativeBudget(String),

    #[error("unit cost {value} for stage `{stage}` must be strictly positive")]
    NonPositiveUnitCost { stage: StageId, value: String },

    #[error("cost model has no unit cost for stage `{0}`")]
    MissingUnitCost(StageId),

    #[error("cost model names stage `{0}`, which is not in the pipeline")]
    UnknownCostStage(StageId),

    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
}

impl Error {
    pub(crate) fn on(self, side: Side) -> Error {
        Error::Side {
            side,
            source: Box::new(self),
        }
    }
}
