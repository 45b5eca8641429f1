//! Useful throughput of an alert-investigation stage.
//!
//! Alerts arrive at rate `lambda`; at most `investigation_capacity` of them
//! can be worked per unit time. Under a fixed false-positive fraction the
//! useful rate saturates into a plateau once the capacity is exceeded. Only a
//! precision that degrades with the alert rate makes it decline.
//!
//! This model is scalar and does not depend on pipelines.

use crate::scalar::Scalar;
use crate::Error;

#[derive(Clone, Debug, PartialEq)]
pub struct FixedFractionModel<S> {
    false_positive_fraction: S,
    investigation_capacity: S,
}

impl<S: Scalar> FixedFractionModel<S> {
    pub fn new(false_positive_fraction: S, investigation_capacity: S) -> Result<Self, Error> {
        if !(false_positive_fraction >= S::zero() && false_positive_fraction < S::one()) {
            return Err(Error::FractionOutOfRange(false_positive_fraction.to_string()));
        }
        check_capacity(&investigation_capacity)?;
        Ok(FixedFractionModel {
            false_positive_fraction,
            investigation_capacity,
        })
    }

    pub fn false_positive_fraction(&self) -> &S {
        &self.false_positive_fraction
    }

    pub fn investigation_capacity(&self) -> &S {
        &self.investigation_capacity
    }

    /// `(1 - f) * c_inv`, the value of the plateau.
    pub fn saturated_value(&self) -> S {
        (S::one() - self.false_positive_fraction.clone()) * self.investigation_capacity.clone()
    }
}

fn check_capacity<S: Scalar>(capacity: &S) -> Result<(), Error> {
    if capacity.is_finite() && capacity.is_positive() {
        Ok(())
    } else {
        Err(Error::NonPositiveInvestigationCapacity(capacity.to_string()))
    }
}

fn check_rate<S: Scalar>(rate: &S) -> Result<(), Error> {
    if rate.is_finite() && rate.is_positive() {
        Ok(())
    } else {
        Err(Error::NonPositiveRate(rate.to_string()))
    }
}

fn worked<S: Scalar>(rate: &S, capacity: &S) -> S {
    if rate < capacity {
        rate.clone()
    } else {
        capacity.clone()
    }
}

/// `(1 - f) * min(lambda, c_inv)`.
pub fn simple_useful<S: Scalar>(rate: &S, model: &FixedFractionModel<S>) -> Result<S, Error> {
    check_rate(rate)?;
    Ok((S::one() - model.false_positive_fraction.clone()) * worked(rate, &model.investigation_capacity))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlateauVerdict<S> {
    pub common_value: S,
    pub holds: bool,
    /// Sample positions whose value differed from the plateau.
    pub mismatches: Vec<usize>,
}

/// Evaluates the fixed-fraction model at samples above capacity and checks
/// that every value equals the plateau exactly.
pub fn plateau_check<S: Scalar>(model: &FixedFractionModel<S>, samples: &[S]) -> Result<PlateauVerdict<S>, Error> {
    for sample in samples {
        require_above(sample, &model.investigation_capacity)?;
    }
    let common_value = model.saturated_value();
    let mut mismatches = Vec::new();
    for (i, sample) in samples.iter().enumerate() {
        if simple_useful(sample, model)? != common_value {
            mismatches.push(i);
        }
    }
    Ok(PlateauVerdict {
        holds: mismatches.is_empty(),
        common_value,
        mismatches,
    })
}

fn require_above<S: Scalar>(sample: &S, capacity: &S) -> Result<(), Error> {
    if sample > capacity {
        Ok(())
    } else {
        Err(Error::SampleNotAboveCapacity {
            sample: sample.to_string(),
            capacity: capacity.to_string(),
        })
    }
}

/// Supported precision curves.
#[derive(Clone, Debug, PartialEq)]
pub enum Family<S> {
    /// `p(lambda) = value`.
    Constant(S),
    /// `p(lambda) = 1 / (1 + rate * lambda)`.
    RationalDecay { rate: S },
    /// `p(lambda) = exp(-rate * lambda)`.
    ExponentialDecay { rate: S },
    /// Piecewise-linear through `(lambda_i, p_i)`, undefined outside the span.
    Table(Vec<(S, S)>),
}

/// Precision as a function of alert rate, with values in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecisionFunction<S> {
    family: Family<S>,
}

/// A precision or useful-throughput value: exact where the family allows it,
/// otherwise a pair of rigorous bounds.
#[derive(Clone, Debug, PartialEq)]
pub enum Value<S> {
    Exact(S),
    Enclosed { lower: S, upper: S },
}

impl<S: Scalar> Value<S> {
    pub fn lower(&self) -> &S {
        match self {
            Value::Exact(v) => v,
            Value::Enclosed { lower, .. } => lower,
        }
    }

    pub fn upper(&self) -> &S {
        match self {
            Value::Exact(v) => v,
            Value::Enclosed { upper, .. } => upper,
        }
    }

    pub fn exact(&self) -> Option<&S> {
        match self {
            Value::Exact(v) => Some(v),
            Value::Enclosed { .. } => None,
        }
    }

    fn scale(self, by: &S) -> Value<S> {
        match self {
            Value::Exact(v) => Value::Exact(v * by.clone()),
            Value::Enclosed { lower, upper } => Value::Enclosed {
                lower: lower * by.clone(),
                upper: upper * by.clone(),
            },
        }
    }
}

fn in_unit_interval<S: Scalar>(v: &S) -> bool {
    *v >= S::zero() && *v <= S::one()
}

impl<S: Scalar> PrecisionFunction<S> {
    pub fn constant(value: S) -> Result<Self, Error> {
        if !in_unit_interval(&value) {
            return Err(Error::InvalidPrecision(format!("constant {value} outside [0, 1]")));
        }
        Ok(PrecisionFunction {
            family: Family::Constant(value),
        })
    }

    pub fn rational_decay(rate: S) -> Result<Self, Error> {
        Self::positive_rate(&rate)?;
        Ok(PrecisionFunction {
            family: Family::RationalDecay { rate },
        })
    }

    pub fn exponential_decay(rate: S) -> Result<Self, Error> {
        Self::positive_rate(&rate)?;
        Ok(PrecisionFunction {
            family: Family::ExponentialDecay { rate },
        })
    }

    /// Breakpoints must have strictly increasing positive rates and
    /// precisions in `[0, 1]`.
    pub fn table(breakpoints: Vec<(S, S)>) -> Result<Self, Error> {
        if breakpoints.is_empty() {
            return Err(Error::InvalidPrecision("table has no breakpoints".into()));
        }
        for (i, (rate, precision)) in breakpoints.iter().enumerate() {
            if !rate.is_finite() || !rate.is_positive() {
                return Err(Error::InvalidPrecision(format!("breakpoint rate {rate} is not positive")));
            }
            if !in_unit_interval(precision) {
                return Err(Error::InvalidPrecision(format!("breakpoint precision {precision} outside [0, 1]")));
            }
            if i > 0 && breakpoints[i - 1].0 >= *rate {
                return Err(Error::InvalidPrecision(format!(
                    "breakpoint rates must strictly increase (position {i})"
                )));
            }
        }
        Ok(PrecisionFunction {
            family: Family::Table(breakpoints),
        })
    }

    fn positive_rate(rate: &S) -> Result<(), Error> {
        if rate.is_finite() && rate.is_positive() {
            Ok(())
        } else {
            Err(Error::InvalidPrecision(format!("decay rate {rate} must be strictly positive")))
        }
    }

    pub fn family(&self) -> &Family<S> {
        &self.family
    }

    pub fn at(&self, rate: &S) -> Result<Value<S>, Error> {
        check_rate(rate)?;
        Ok(match &self.family {
            Family::Constant(v) => Value::Exact(v.clone()),
            Family::RationalDecay { rate: k } => Value::Exact(S::one() / (S::one() + k.clone() * rate.clone())),
            Family::ExponentialDecay { rate: k } => {
                let (lower, upper) = (k.clone() * rate.clone()).exp_neg_enclosure();
                Value::Enclosed { lower, upper }
            }
            Family::Table(points) => Value::Exact(interpolate(points, rate)?),
        })
    }

    /// Checks strict decrease on every part of the domain above `capacity`.
    ///
    /// The closed-form decays always pass; a constant never does. A table
    /// passes when each segment reaching above `capacity` strictly drops.
    pub fn validate_strictly_decreasing(&self, capacity: &S) -> Result<(), Error> {
        match &self.family {
            Family::Constant(v) => Err(Error::NotStrictlyDecreasing(format!("constant precision {v}"))),
            Family::RationalDecay { .. } | Family::ExponentialDecay { .. } => Ok(()),
            Family::Table(points) => {
                for pair in points.windows(2) {
                    let ((_, p0), (r1, p1)) = (&pair[0], &pair[1]);
                    if r1 > capacity && p0 <= p1 {
                        return Err(Error::NotStrictlyDecreasing(format!(
                            "segment ending at rate {r1} goes from {p0} to {p1}"
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

fn interpolate<S: Scalar>(points: &[(S, S)], rate: &S) -> Result<S, Error> {
    let (first, last) = (&points[0], &points[points.len() - 1]);
    if rate < &first.0 || rate > &last.0 {
        return Err(Error::OutsideTable {
            rate: rate.to_string(),
            low: first.0.to_string(),
            high: last.0.to_string(),
        });
    }
    for pair in points.windows(2) {
        let ((r0, p0), (r1, p1)) = (&pair[0], &pair[1]);
        if rate <= r1 {
            let t = (rate.clone() - r0.clone()) / (r1.clone() - r0.clone());
            return Ok(p0.clone() + t * (p1.clone() - p0.clone()));
        }
    }
    Ok(last.1.clone())
}

/// `p(lambda) * min(lambda, c_inv)`.
pub fn repaired_useful<S: Scalar>(rate: &S, precision: &PrecisionFunction<S>, capacity: &S) -> Result<Value<S>, Error> {
    check_capacity(capacity)?;
    Ok(precision.at(rate)?.scale(&worked(rate, capacity)))
}

#[derive(Clone, Debug, PartialEq)]
pub enum DeclineVerdict<S> {
    /// Strictly decreasing family: every consecutive pair must drop.
    StrictDecline {
        values: Vec<Value<S>>,
        holds: bool,
        /// Index `i` of the first pair `(i, i + 1)` that failed to drop.
        first_failure: Option<usize>,
    },
    /// Constant family: every value must equal `value` exactly.
    Constant { value: S, holds: bool },
}

impl<S> DeclineVerdict<S> {
    pub fn holds(&self) -> bool {
        match self {
            DeclineVerdict::StrictDecline { holds, .. } | DeclineVerdict::Constant { holds, .. } => *holds,
        }
    }
}

/// Checks that repaired useful throughput strictly falls across increasing
/// samples above capacity, or stays exactly constant for a constant precision.
///
/// Exponential values are compared through their exponents, which is exact;
/// their enclosures must not contradict that ordering.
pub fn decline_check<S: Scalar>(
    precision: &PrecisionFunction<S>,
    capacity: &S,
    samples: &[S],
) -> Result<DeclineVerdict<S>, Error> {
    check_capacity(capacity)?;
    for (i, sample) in samples.iter().enumerate() {
        require_above(sample, capacity)?;
        if i > 0 && samples[i - 1] >= *sample {
            return Err(Error::SamplesNotIncreasing(i));
        }
    }

    if let Family::Constant(level) = &precision.family {
        let value = level.clone() * capacity.clone();
        let mut holds = true;
        for sample in samples {
            holds &= repaired_useful(sample, precision, capacity)?.exact() == Some(&value);
        }
        return Ok(DeclineVerdict::Constant { value, holds });
    }

    precision.validate_strictly_decreasing(capacity)?;
    let values = samples
        .iter()
        .map(|s| repaired_useful(s, precision, capacity))
        .collect::<Result<Vec<_>, _>>()?;

    let first_failure = (1..values.len()).find(|&i| {
        let (earlier, later) = (&values[i - 1], &values[i]);
        let drops = match &precision.family {
            Family::ExponentialDecay { rate } => {
                let by_exponent = rate.clone() * samples[i - 1].clone() < rate.clone() * samples[i].clone();
                by_exponent && earlier.upper() >= later.lower()
            }
            _ => earlier.lower() > later.upper(),
        };
        !drops
    });
    Ok(DeclineVerdict::StrictDecline {
        holds: first_failure.is_none(),
        values,
        first_failure: first_failure.map(|i| i - 1),
    })
}
