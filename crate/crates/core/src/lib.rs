//! Exact throughput calculus for deterministic serial pipelines.
//!
//! Throughput is the minimum stage capacity. Improvements are per-stage
//! multiplicative factors of at least 1. On top of that the crate covers:
//!
//! * [`characterize`]: when a perturbation leaves throughput unchanged,
//!   raises it, keeps the bottleneck set, or moves it;
//! * [`ceiling`]: the throughput ceiling imposed by stages that cannot be
//!   accelerated, and a multiplier that reaches it;
//! * [`adversarial`]: comparing improvements of two independent pipelines;
//! * [`falsepos`]: useful-throughput models for alert triage;
//! * [`planner`]: spending a linear improvement budget.
//!
//! All code is generic over [`Scalar`]. The aliases at the crate root fix the
//! scalar to [`Rational`] (exact, used for every tie-sensitive check) or
//! `f64`.

pub mod adversarial;
pub mod ceiling;
pub mod characterize;
mod error;
pub mod exact;
pub mod falsepos;
pub mod model;
pub mod planner;
pub mod scalar;
mod verdict;

pub use error::{Error, Side};
pub use model::{
    validate_pipeline, BottleneckReport, Multiplier, Pipeline, RawPipeline, StageId, ValidationReport, Violation,
};
pub use scalar::Scalar;
pub use verdict::{Counterexample, Verdict};

/// Arbitrary-precision rational in lowest terms.
pub type Rational = num_rational::BigRational;

pub type RationalPipeline = Pipeline<Rational>;
pub type RationalMultiplier = Multiplier<Rational>;
pub type RationalBottleneckReport = BottleneckReport<Rational>;
pub type RationalAuthority = ceiling::AuthoritySpec<Rational>;
pub type RationalPipePair = adversarial::PipePair<Rational>;
pub type RationalRatioReport = adversarial::RatioReport<Rational>;
pub type RationalPrecision = falsepos::PrecisionFunction<Rational>;
pub type RationalFixedFraction = falsepos::FixedFractionModel<Rational>;
pub type RationalCostModel = planner::CostModel<Rational>;
pub type RationalAllocation = planner::AllocationResult<Rational>;

pub type FloatPipeline = Pipeline<f64>;
pub type FloatMultiplier = Multiplier<f64>;
