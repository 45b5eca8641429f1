//! Pipelines, multipliers, and the foundational throughput operations.

use std::borrow::Borrow;
use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::scalar::{min_of, Scalar};
use crate::Error;

/// Identifier of a stage, unique within its pipeline.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StageId(String);

impl StageId {
    pub fn new(token: impl Into<String>) -> Self {
        StageId(token.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for StageId {
    fn from(value: &str) -> Self {
        StageId(value.to_string())
    }
}

impl From<String> for StageId {
    fn from(value: String) -> Self {
        StageId(value)
    }
}

impl Borrow<str> for StageId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Unvalidated pipeline description, as read from a file or built by hand.
///
/// The stage list and the capacity table are kept separate so that every
/// mismatch between them can be reported.
#[derive(Clone, Debug, Default)]
pub struct RawPipeline<S> {
    pub stages: Vec<String>,
    pub capacities: Vec<(String, S)>,
}

impl<S: Clone> RawPipeline<S> {
    pub fn from_pairs<I, K>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, S)>,
        K: Into<String>,
    {
        let capacities: Vec<(String, S)> = pairs.into_iter().map(|(k, v)| (k.into(), v)).collect();
        RawPipeline {
            stages: capacities.iter().map(|(k, _)| k.clone()).collect(),
            capacities,
        }
    }
}

/// One broken pipeline invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EmptyStageSet,
    EmptyStageId { position: usize },
    DuplicateStage(String),
    MissingCapacity(String),
    NonPositiveCapacity { stage: String, value: String },
    NonFiniteCapacity { stage: String },
    UnknownCapacityStage(String),
    DuplicateCapacity(String),
}

impl Violation {
    /// Number of the modelling assumption the violation breaks, if any.
    pub fn assumption(&self) -> Option<u8> {
        match self {
            Violation::EmptyStageSet => Some(1),
            Violation::MissingCapacity(_)
            | Violation::NonPositiveCapacity { .. }
            | Violation::NonFiniteCapacity { .. } => Some(2),
            _ => None,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyStageSet => write!(f, "stage set is empty"),
            Violation::EmptyStageId { position } => {
                write!(f, "stage at position {position} has an empty identifier")
            }
            Violation::DuplicateStage(id) => write!(f, "stage `{id}` appears more than once"),
            Violation::MissingCapacity(id) => write!(f, "stage `{id}` has no capacity"),
            Violation::NonPositiveCapacity { stage, value } => {
                write!(f, "stage `{stage}` has capacity {value}, which is not strictly positive")
            }
            Violation::NonFiniteCapacity { stage } => {
                write!(f, "stage `{stage}` has a non-finite capacity")
            }
            Violation::UnknownCapacityStage(id) => {
                write!(f, "capacity given for unknown stage `{id}`")
            }
            Violation::DuplicateCapacity(id) => {
                write!(f, "stage `{id}` has more than one capacity")
            }
        }?;
        if let Some(n) = self.assumption() {
            write!(f, " (Assumption {n})")?;
        }
        Ok(())
    }
}

/// Every violation found in a raw description, in discovery order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn violated_assumptions(&self) -> Vec<u8> {
        let mut out: Vec<u8> = self.violations.iter().filter_map(Violation::assumption).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks a raw description against the pipeline invariants.
pub fn validate_pipeline<S: Scalar>(raw: RawPipeline<S>) -> Result<Pipeline<S>, ValidationReport> {
    let mut violations = Vec::new();
    if raw.stages.is_empty() {
        violations.push(Violation::EmptyStageSet);
    }

    let mut seen = HashSet::new();
    for (position, id) in raw.stages.iter().enumerate() {
        if id.is_empty() {
            violations.push(Violation::EmptyStageId { position });
        } else if !seen.insert(id.as_str()) {
            violations.push(Violation::DuplicateStage(id.clone()));
        }
    }

    let mut table: BTreeMap<&str, &S> = BTreeMap::new();
    for (id, value) in &raw.capacities {
        if !seen.contains(id.as_str()) {
            violations.push(Violation::UnknownCapacityStage(id.clone()));
        } else if table.insert(id.as_str(), value).is_some() {
            violations.push(Violation::DuplicateCapacity(id.clone()));
        }
    }

    let mut stages = Vec::with_capacity(raw.stages.len());
    let mut capacities = Vec::with_capacity(raw.stages.len());
    let mut reported = HashSet::new();
    for id in &raw.stages {
        if id.is_empty() || !reported.insert(id.as_str()) {
            continue;
        }
        match table.get(id.as_str()) {
            None => violations.push(Violation::MissingCapacity(id.clone())),
            Some(value) if !value.is_finite() => {
                violations.push(Violation::NonFiniteCapacity { stage: id.clone() })
            }
            Some(value) if !value.is_positive() => violations.push(Violation::NonPositiveCapacity {
                stage: id.clone(),
                value: value.to_string(),
            }),
            Some(value) => {
                stages.push(StageId::new(id.clone()));
                capacities.push((*value).clone());
            }
        }
    }

    if violations.is_empty() {
        Ok(Pipeline { stages, capacities })
    } else {
        Err(ValidationReport { violations })
    }
}

/// A serial pipeline: ordered stages with strictly positive capacities.
///
/// The stage order is kept for reporting only; no computation depends on it
/// beyond choosing the order in which stage sets are listed.
#[derive(Clone, Debug, PartialEq)]
pub struct Pipeline<S> {
    stages: Vec<StageId>,
    capacities: Vec<S>,
}

/// Throughput together with the bottleneck / non-bottleneck partition.
#[derive(Clone, Debug, PartialEq)]
pub struct BottleneckReport<S> {
    pub throughput: S,
    pub bottlenecks: Vec<StageId>,
    pub non_bottlenecks: Vec<StageId>,
}

impl<S: Scalar> Pipeline<S> {
    /// Builds a pipeline from `(id, capacity)` pairs in stage order.
    pub fn new<I, K>(pairs: I) -> Result<Self, Error>
    where
        I: IntoIterator<Item = (K, S)>,
        K: Into<String>,
    {
        validate_pipeline(RawPipeline::from_pairs(pairs)).map_err(Error::InvalidPipeline)
    }

    pub fn stages(&self) -> &[StageId] {
        &self.stages
    }

    pub fn capacities(&self) -> &[S] {
        &self.capacities
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    /// Always false: a valid pipeline has at least one stage.
    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StageId, &S)> {
        self.stages.iter().zip(&self.capacities)
    }

    pub fn position(&self, stage: &str) -> Option<usize> {
        self.stages.iter().position(|s| s.as_str() == stage)
    }

    pub fn contains(&self, stage: &str) -> bool {
        self.position(stage).is_some()
    }

    pub fn capacity(&self, stage: &str) -> Option<&S> {
        self.position(stage).map(|i| &self.capacities[i])
    }

    /// Minimum stage capacity.
    pub fn throughput(&self) -> S {
        min_of(self.capacities.iter().cloned()).expect("pipeline has at least one stage")
    }

    /// Membership mask of the bottleneck set, aligned with `stages()`.
    pub fn bottleneck_mask(&self) -> Vec<bool> {
        mask_of_minimum(&self.capacities)
    }

    /// Bottleneck stages in stage order.
    pub fn bottlenecks(&self) -> Vec<StageId> {
        self.select(&self.bottleneck_mask(), true)
    }

    pub fn bottleneck_report(&self) -> BottleneckReport<S> {
        let mask = self.bottleneck_mask();
        BottleneckReport {
            throughput: self.throughput(),
            bottlenecks: self.select(&mask, true),
            non_bottlenecks: self.select(&mask, false),
        }
    }

    pub(crate) fn select(&self, mask: &[bool], keep: bool) -> Vec<StageId> {
        self.stages
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m == keep)
            .map(|(s, _)| s.clone())
            .collect()
    }

    /// Factors of `multiplier` in stage order, after checking that its domain
    /// is exactly this pipeline's stage set.
    pub fn aligned_factors<'m>(&self, multiplier: &'m Multiplier<S>) -> Result<Vec<&'m S>, Error> {
        let factors = self
            .stages
            .iter()
            .map(|s| multiplier.factor(s.as_str()).ok_or_else(|| Error::MissingFactor(s.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        if multiplier.len() != self.len() {
            let extra = multiplier
                .stages()
                .find(|s| !self.contains(s.as_str()))
                .expect("domain larger than stage set implies an unknown stage");
            return Err(Error::UnknownFactorStage(extra.clone()));
        }
        Ok(factors)
    }

    pub fn check_admissible(&self, multiplier: &Multiplier<S>) -> Result<(), Error> {
        self.aligned_factors(multiplier).map(|_| ())
    }

    /// Stagewise products `factor(v) * capacity(v)` in stage order.
    pub fn perturbed_capacities(&self, multiplier: &Multiplier<S>) -> Result<Vec<S>, Error> {
        Ok(self
            .aligned_factors(multiplier)?
            .into_iter()
            .zip(&self.capacities)
            .map(|(a, c)| a.clone() * c.clone())
            .collect())
    }

    /// The perturbed pipeline: same stages, capacities scaled stagewise.
    pub fn perturb(&self, multiplier: &Multiplier<S>) -> Result<Pipeline<S>, Error> {
        let capacities = self.perturbed_capacities(multiplier)?;
        // Products of factors >= 1 and positive capacities stay positive.
        debug_assert!(capacities.iter().all(Scalar::is_positive));
        Ok(Pipeline {
            stages: self.stages.clone(),
            capacities,
        })
    }

    /// Throughput after perturbation, computed directly as the minimum of
    /// the stagewise products without materialising the perturbed pipeline.
    pub fn perturbed_throughput(&self, multiplier: &Multiplier<S>) -> Result<S, Error> {
        let products = self.perturbed_capacities(multiplier)?;
        Ok(min_of(products).expect("pipeline has at least one stage"))
    }

    /// Whether the bottleneck set changes under `multiplier`.
    pub fn migration_occurred(&self, multiplier: &Multiplier<S>) -> Result<bool, Error> {
        let after = mask_of_minimum(&self.perturbed_capacities(multiplier)?);
        Ok(after != self.bottleneck_mask())
    }

    /// Same stages with every capacity multiplied by `scale > 0`.
    pub fn scaled(&self, scale: &S) -> Result<Pipeline<S>, Error> {
        Pipeline::new(self.iter().map(|(s, c)| (s.as_str().to_string(), c.clone() * scale.clone())))
    }
}

pub(crate) fn mask_of_minimum<S: Scalar>(values: &[S]) -> Vec<bool> {
    let min = min_of(values.iter().cloned()).expect("nonempty family");
    values.iter().map(|v| *v == min).collect()
}

/// Per-stage improvement factors, each at least 1.
#[derive(Clone, Debug, PartialEq)]
pub struct Multiplier<S> {
    factors: BTreeMap<StageId, S>,
}

impl<S: Scalar> Multiplier<S> {
    pub fn new<I, K>(pairs: I) -> Result<Self, Error>
    where
        I: IntoIterator<Item = (K, S)>,
        K: Into<StageId>,
    {
        let mut factors = BTreeMap::new();
        for (stage, factor) in pairs {
            let stage = stage.into();
            if !factor.is_finite() {
                return Err(Error::NonFiniteFactor(stage));
            }
            if factor < S::one() {
                return Err(Error::FactorBelowOne {
                    stage,
                    factor: factor.to_string(),
                });
            }
            if factors.contains_key(&stage) {
                return Err(Error::DuplicateFactor(stage));
            }
            factors.insert(stage, factor);
        }
        Ok(Multiplier { factors })
    }

    /// All-ones multiplier over `pipeline`'s stages.
    pub fn identity(pipeline: &Pipeline<S>) -> Self {
        Multiplier {
            factors: pipeline.stages.iter().map(|s| (s.clone(), S::one())).collect(),
        }
    }

    pub fn uniform(pipeline: &Pipeline<S>, factor: S) -> Result<Self, Error> {
        Multiplier::new(pipeline.stages.iter().map(|s| (s.clone(), factor.clone())))
    }

    /// Identity on `pipeline` except for the listed overrides.
    pub fn with_overrides<I, K>(pipeline: &Pipeline<S>, overrides: I) -> Result<Self, Error>
    where
        I: IntoIterator<Item = (K, S)>,
        K: Into<StageId>,
    {
        let mut out = Multiplier::identity(pipeline);
        let mut touched = HashSet::new();
        for (stage, factor) in overrides {
            let stage = stage.into();
            if !pipeline.contains(stage.as_str()) {
                return Err(Error::UnknownFactorStage(stage));
            }
            if !touched.insert(stage.clone()) {
                return Err(Error::DuplicateFactor(stage));
            }
            let checked = Multiplier::new([(stage.clone(), factor)])?;
            out.factors.extend(checked.factors);
        }
        Ok(out)
    }

    pub fn factor(&self, stage: &str) -> Option<&S> {
        self.factors.get(stage)
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn stages(&self) -> impl Iterator<Item = &StageId> {
        self.factors.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StageId, &S)> {
        self.factors.iter()
    }

    pub fn is_identity(&self) -> bool {
        self.factors.values().all(|f| *f == S::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    type Q = BigRational;

    fn q(n: i64) -> Q {
        Q::from_int(n)
    }

    fn example() -> Pipeline<Q> {
        Pipeline::new([("a", q(3)), ("b", q(1)), ("c", q(4))]).unwrap()
    }

    fn only_b(factor: Q) -> Multiplier<Q> {
        Multiplier::with_overrides(&example(), [("b", factor)]).unwrap()
    }

    fn ids(names: &[&str]) -> Vec<StageId> {
        names.iter().map(|s| StageId::from(*s)).collect()
    }

    /// Independent oracle: linear scan keeping the smallest value seen.
    fn scan_min(values: &[i64]) -> i64 {
        let mut best = values[0];
        for &v in &values[1..] {
            if v < best {
                best = v;
            }
        }
        best
    }

    #[test]
    fn throughput_of_worked_example() {
        assert_eq!(example().throughput(), q(1));
    }

    #[test]
    fn throughput_of_single_stage() {
        assert_eq!(Pipeline::new([("only", q(7))]).unwrap().throughput(), q(7));
    }

    #[test]
    fn throughput_matches_scan_on_six_stages() {
        // Frozen from scan_min over the fixed draw below.
        let caps = [6, 9, 2, 10, 2, 7];
        assert_eq!(scan_min(&caps), 2);
        let p = Pipeline::new(caps.iter().enumerate().map(|(i, &c)| (format!("s{i}"), q(c)))).unwrap();
        assert_eq!(p.throughput(), q(2));
    }

    #[test]
    fn bottleneck_report_partitions_stages() {
        let report = example().bottleneck_report();
        assert_eq!(report.throughput, q(1));
        assert_eq!(report.bottlenecks, ids(&["b"]));
        assert_eq!(report.non_bottlenecks, ids(&["a", "c"]));
    }

    #[test]
    fn equal_capacities_make_every_stage_a_bottleneck() {
        let p = Pipeline::new([("x", q(4)), ("y", q(4)), ("z", q(4))]).unwrap();
        let report = p.bottleneck_report();
        assert_eq!(report.bottlenecks, ids(&["x", "y", "z"]));
        assert!(report.non_bottlenecks.is_empty());
    }

    #[test]
    fn tied_minimum_lists_both_stages() {
        let p = Pipeline::new([("first", q(2)), ("second", q(2)), ("third", q(5))]).unwrap();
        assert_eq!(p.bottlenecks(), ids(&["first", "second"]));
    }

    #[test]
    fn perturb_scales_stagewise() {
        let p = example();
        assert_eq!(p.perturb(&Multiplier::identity(&p)).unwrap(), p);
        let bumped = p.perturb(&only_b(q(2))).unwrap();
        assert_eq!(bumped.capacities(), &[q(3), q(2), q(4)]);
        assert_eq!(bumped.stages(), p.stages());
    }

    #[test]
    fn perturbed_throughput_examples() {
        let p = example();
        assert_eq!(p.perturbed_throughput(&only_b(q(2))).unwrap(), q(2));
        assert_eq!(p.perturbed_throughput(&Multiplier::identity(&p)).unwrap(), q(1));
        assert_eq!(p.perturbed_throughput(&only_b(q(5))).unwrap(), q(3));
    }

    #[test]
    fn migration_examples() {
        let p = example();
        assert!(p.migration_occurred(&only_b(q(5))).unwrap());
        assert!(!p.migration_occurred(&Multiplier::identity(&p)).unwrap());
        assert!(!p.migration_occurred(&only_b(q(2))).unwrap());
    }

    #[test]
    fn inadmissible_multipliers_are_rejected() {
        let p = example();
        let below = Multiplier::new([("a", Q::from_ratio(1, 2)), ("b", q(1)), ("c", q(1))]);
        assert!(matches!(below, Err(Error::FactorBelowOne { .. })));

        let short = Multiplier::new([("a", q(1)), ("b", q(1))]).unwrap();
        assert_eq!(p.perturb(&short), Err(Error::MissingFactor("c".into())));

        let extra = Multiplier::new([("a", q(1)), ("b", q(1)), ("c", q(1)), ("d", q(2))]).unwrap();
        assert_eq!(p.perturb(&extra), Err(Error::UnknownFactorStage("d".into())));

        let dup = Multiplier::new([("a", q(1)), ("a", q(2))]);
        assert_eq!(dup, Err(Error::DuplicateFactor("a".into())));

        assert!(matches!(
            Multiplier::with_overrides(&p, [("zz", q(2))]),
            Err(Error::UnknownFactorStage(_))
        ));
    }

    #[test]
    fn validation_reports_empty_stage_set() {
        let report = validate_pipeline(RawPipeline::<Q>::default()).unwrap_err();
        assert_eq!(report.violations, vec![Violation::EmptyStageSet]);
        assert_eq!(report.violated_assumptions(), vec![1]);
    }

    #[test]
    fn validation_reports_zero_capacity() {
        let raw = RawPipeline::from_pairs([("a", q(3)), ("b", q(0))]);
        let report = validate_pipeline(raw).unwrap_err();
        assert_eq!(report.violated_assumptions(), vec![2]);
        assert!(report.to_string().contains("Assumption 2"));
    }

    #[test]
    fn validation_accepts_worked_example() {
        let raw = RawPipeline::from_pairs([("a", q(3)), ("b", q(1)), ("c", q(4))]);
        let p = validate_pipeline(raw).unwrap();
        assert_eq!(p.capacity("a"), Some(&q(3)));
    }

    #[test]
    fn validation_collects_every_violation() {
        let raw = RawPipeline {
            stages: vec!["a".into(), "a".into(), "".into(), "b".into(), "c".into()],
            capacities: vec![
                ("a".into(), q(1)),
                ("b".into(), q(-2)),
                ("ghost".into(), q(1)),
                ("a".into(), q(2)),
            ],
        };
        let report = validate_pipeline(raw).unwrap_err();
        assert_eq!(
            report.violations,
            vec![
                Violation::DuplicateStage("a".into()),
                Violation::EmptyStageId { position: 2 },
                Violation::UnknownCapacityStage("ghost".into()),
                Violation::DuplicateCapacity("a".into()),
                Violation::NonPositiveCapacity { stage: "b".into(), value: "-2".into() },
                Violation::MissingCapacity("c".into()),
            ]
        );
    }

    #[test]
    fn float_pipelines_reject_nan() {
        let report = validate_pipeline(RawPipeline::from_pairs([("a", f64::NAN)])).unwrap_err();
        assert_eq!(report.violated_assumptions(), vec![2]);
        let p = Pipeline::new([("a", 3.0f64), ("b", 1.5)]).unwrap();
        assert_eq!(p.throughput(), 1.5);
    }

    fn caps_and_factors() -> impl Strategy<Value = (Vec<i64>, Vec<(i64, i64)>)> {
        (1usize..8).prop_flat_map(|n| {
            (
                prop::collection::vec(1i64..=10, n),
                prop::collection::vec((1i64..=12, 1i64..=4), n),
            )
        })
    }

    fn build(caps: &[i64], factors: &[(i64, i64)]) -> (Pipeline<Q>, Multiplier<Q>) {
        let p = Pipeline::new(caps.iter().enumerate().map(|(i, &c)| (format!("s{i}"), q(c)))).unwrap();
        // n/d with n >= d keeps every factor >= 1.
        let m = Multiplier::new(
            factors
                .iter()
                .enumerate()
                .map(|(i, &(n, d))| (format!("s{i}"), Q::from_ratio(n.max(d), d))),
        )
        .unwrap();
        (p, m)
    }

    proptest! {
        #[test]
        fn bottleneck_set_is_nonempty_and_attains_throughput((caps, _) in caps_and_factors()) {
            let (p, _) = build(&caps, &vec![(1, 1); caps.len()]);
            let report = p.bottleneck_report();
            prop_assert!(!report.bottlenecks.is_empty());
            prop_assert_eq!(report.bottlenecks.len() + report.non_bottlenecks.len(), p.len());
            for b in &report.bottlenecks {
                prop_assert_eq!(p.capacity(b.as_str()).unwrap(), &report.throughput);
            }
            for nb in &report.non_bottlenecks {
                prop_assert!(p.capacity(nb.as_str()).unwrap() > &report.throughput);
            }
            prop_assert_eq!(report.throughput, q(scan_min(&caps)));
        }

        #[test]
        fn perturb_is_closed_and_matches_elementwise_products((caps, factors) in caps_and_factors()) {
            let (p, m) = build(&caps, &factors);
            let perturbed = p.perturb(&m).unwrap();
            for (i, (&c, &(n, d))) in caps.iter().zip(&factors).enumerate() {
                let expected = Q::from_ratio(n.max(d) * c, d);
                prop_assert_eq!(&perturbed.capacities()[i], &expected);
                prop_assert!(expected.is_positive());
            }
            prop_assert_eq!(p.perturbed_throughput(&m).unwrap(), perturbed.throughput());
            prop_assert!(p.perturbed_throughput(&m).unwrap() >= p.throughput());
        }

        #[test]
        fn throughput_is_monotone_in_the_multiplier(
            (caps, factors) in caps_and_factors(),
            extra in prop::collection::vec(1i64..=3, 8),
        ) {
            let (p, small) = build(&caps, &factors);
            let large = Multiplier::new(
                small.iter().enumerate().map(|(i, (s, f))| (s.clone(), f.clone() * q(extra[i]))),
            ).unwrap();
            prop_assert!(p.perturbed_throughput(&small).unwrap() <= p.perturbed_throughput(&large).unwrap());
        }

        #[test]
        fn minimum_of_values_above_a_bound_stays_above_it(
            bound in -50i64..50,
            gaps in prop::collection::vec(1i64..100, 1..10),
        ) {
            let family: Vec<Q> = gaps.iter().map(|g| Q::from_ratio(bound * 7 + g, 7)).collect();
            prop_assert!(min_of(family).unwrap() > Q::from_int(bound));
        }
    }
}
