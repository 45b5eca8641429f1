//! Attacker versus defender: which side gains more from its improvements.
//!
//! The two pipelines are evaluated independently; nothing here couples them.

use crate::model::{Multiplier, Pipeline};
use crate::scalar::Scalar;
use crate::{Error, Side};

#[derive(Clone, Debug, PartialEq)]
pub struct PipePair<S> {
    pub attacker: Pipeline<S>,
    pub defender: Pipeline<S>,
}

impl<S: Scalar> PipePair<S> {
    pub fn new(attacker: Pipeline<S>, defender: Pipeline<S>) -> Self {
        PipePair { attacker, defender }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioReport<S> {
    /// Attacker throughput over defender throughput, both unperturbed.
    pub baseline_ratio: S,
    /// The same ratio after both perturbations.
    pub perturbed_ratio: S,
    pub attacker_gain: S,
    pub defender_gain: S,
    /// The perturbed ratio exceeds the baseline ratio.
    pub favours_attacker: bool,
}

struct SideThroughputs<S> {
    before: S,
    after: S,
}

fn evaluate<S: Scalar>(pipeline: &Pipeline<S>, multiplier: &Multiplier<S>, side: Side) -> Result<SideThroughputs<S>, Error> {
    let after = pipeline.perturbed_throughput(multiplier).map_err(|e| e.on(side))?;
    Ok(SideThroughputs {
        before: pipeline.throughput(),
        after,
    })
}

/// Ratios and relative gains for one pair of perturbations.
///
/// The ratio comparison and the gain comparison are evaluated separately and
/// must agree; disagreement is reported as an internal inconsistency.
pub fn ratio_report<S: Scalar>(
    pair: &PipePair<S>,
    attacker_multiplier: &Multiplier<S>,
    defender_multiplier: &Multiplier<S>,
) -> Result<RatioReport<S>, Error> {
    let a = evaluate(&pair.attacker, attacker_multiplier, Side::Attacker)?;
    let d = evaluate(&pair.defender, defender_multiplier, Side::Defender)?;

    let baseline_ratio = a.before.clone() / d.before.clone();
    let perturbed_ratio = a.after.clone() / d.after.clone();
    let attacker_gain = a.after / a.before;
    let defender_gain = d.after / d.before;

    let ratio_rises = perturbed_ratio > baseline_ratio;
    let attacker_gains_more = attacker_gain > defender_gain;
    if ratio_rises != attacker_gains_more {
        return Err(Error::Inconsistent(format!(
            "ratio {baseline_ratio} -> {perturbed_ratio} disagrees with gains {attacker_gain} vs {defender_gain}"
        )));
    }

    Ok(RatioReport {
        baseline_ratio,
        perturbed_ratio,
        attacker_gain,
        defender_gain,
        favours_attacker: ratio_rises,
    })
}

/// The attacker improves every one of its bottlenecks while the defender
/// leaves at least one of its bottlenecks untouched.
///
/// Whenever this holds the ratio necessarily moves in the attacker's favour;
/// that implication is checked before returning.
pub fn defender_misses_bottleneck<S: Scalar>(
    pair: &PipePair<S>,
    attacker_multiplier: &Multiplier<S>,
    defender_multiplier: &Multiplier<S>,
) -> Result<bool, Error> {
    let one = S::one();
    let attacker_factors = pair
        .attacker
        .aligned_factors(attacker_multiplier)
        .map_err(|e| e.on(Side::Attacker))?;
    let defender_factors = pair
        .defender
        .aligned_factors(defender_multiplier)
        .map_err(|e| e.on(Side::Defender))?;

    let attacker_all_improved = pair
        .attacker
        .bottleneck_mask()
        .iter()
        .zip(&attacker_factors)
        .filter(|(b, _)| **b)
        .all(|(_, f)| **f > one);
    let defender_missed = pair
        .defender
        .bottleneck_mask()
        .iter()
        .zip(&defender_factors)
        .any(|(b, f)| *b && **f == one);
    let holds = attacker_all_improved && defender_missed;

    if holds && !ratio_report(pair, attacker_multiplier, defender_multiplier)?.favours_attacker {
        return Err(Error::Inconsistent(
            "defender missed a bottleneck but the ratio did not move toward the attacker".into(),
        ));
    }
    Ok(holds)
}
