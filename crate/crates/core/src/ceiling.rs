//! Throughput ceiling imposed by stages that only humans may perform.
//!
//! Human stages keep factor 1, so the slowest of them bounds throughput no
//! matter how far the machine stages are accelerated. The bound is reached by
//! accelerating every machine stage past it.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{Multiplier, Pipeline, StageId};
use crate::scalar::{min_of, Scalar};
use crate::Error;

/// Human-authority stages, optionally with per-stage assist bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct AuthoritySpec<S> {
    human: BTreeSet<StageId>,
    assist_bound: Option<BTreeMap<StageId, S>>,
}

impl<S: Scalar> AuthoritySpec<S> {
    pub fn new<I, K>(human: I) -> Self
    where
        I: IntoIterator<Item = K>,
        K: Into<StageId>,
    {
        AuthoritySpec {
            human: human.into_iter().map(Into::into).collect(),
            assist_bound: None,
        }
    }

    /// Attaches assist bounds; their domain must be exactly the human set
    /// and every bound must be at least 1.
    pub fn with_assist_bounds<I, K>(mut self, bounds: I) -> Result<Self, Error>
    where
        I: IntoIterator<Item = (K, S)>,
        K: Into<StageId>,
    {
        let mut map = BTreeMap::new();
        for (stage, bound) in bounds {
            let stage = stage.into();
            if !self.human.contains(&stage) || map.contains_key(&stage) {
                return Err(Error::AssistDomain(stage));
            }
            if !bound.is_finite() || bound < S::one() {
                return Err(Error::AssistBoundBelowOne {
                    stage,
                    value: bound.to_string(),
                });
            }
            map.insert(stage, bound);
        }
        if let Some(missing) = self.human.iter().find(|h| !map.contains_key(*h)) {
            return Err(Error::AssistDomain(missing.clone()));
        }
        self.assist_bound = Some(map);
        Ok(self)
    }

    pub fn human_stages(&self) -> impl Iterator<Item = &StageId> {
        self.human.iter()
    }

    pub fn is_human(&self, stage: &str) -> bool {
        self.human.contains(stage)
    }

    pub fn assist_bound(&self, stage: &str) -> Option<&S> {
        self.assist_bound.as_ref().and_then(|m| m.get(stage))
    }

    pub fn has_assist_bounds(&self) -> bool {
        self.assist_bound.is_some()
    }

    /// Positions of the human stages in `pipeline`.
    fn positions(&self, pipeline: &Pipeline<S>) -> Result<Vec<usize>, Error> {
        if self.human.is_empty() {
            return Err(Error::EmptyHumanSet);
        }
        self.human
            .iter()
            .map(|h| pipeline.position(h.as_str()).ok_or_else(|| Error::UnknownHumanStage(h.clone())))
            .collect()
    }
}

/// Minimum capacity over the human stages.
pub fn ceiling<S: Scalar>(pipeline: &Pipeline<S>, authority: &AuthoritySpec<S>) -> Result<S, Error> {
    let caps = pipeline.capacities();
    let positions = authority.positions(pipeline)?;
    Ok(min_of(positions.into_iter().map(|i| caps[i].clone())).expect("human set is nonempty"))
}

/// Whether `multiplier` leaves every human stage at factor exactly 1.
pub fn is_h_admissible<S: Scalar>(multiplier: &Multiplier<S>, authority: &AuthoritySpec<S>) -> bool {
    authority
        .human_stages()
        .all(|h| multiplier.factor(h.as_str()).is_some_and(|f| *f == S::one()))
}

/// Multiplier that keeps human stages at 1 and lifts throughput exactly to
/// the ceiling.
///
/// With machine stages present, each gets the factor
/// `ceil(ceiling / slowest machine capacity) + 1`, which pushes every machine
/// product strictly above the ceiling. With no machine stages the identity is
/// the only admissible choice and already attains it.
pub fn tightness_witness<S: Scalar>(
    pipeline: &Pipeline<S>,
    authority: &AuthoritySpec<S>,
) -> Result<Multiplier<S>, Error> {
    let bound = ceiling(pipeline, authority)?;
    let machine: Vec<(&StageId, &S)> = pipeline.iter().filter(|(s, _)| !authority.is_human(s.as_str())).collect();
    let Some(slowest) = min_of(machine.iter().map(|(_, c)| (*c).clone())) else {
        return Ok(Multiplier::identity(pipeline));
    };
    let factor = (bound / slowest).ceil() + S::one();
    Multiplier::with_overrides(pipeline, machine.into_iter().map(|(s, _)| (s.clone(), factor.clone())))
}

/// Upper bound `min over human h of assist_bound(h) * capacity(h)` for
/// multipliers that may assist human stages up to their bound.
///
/// Only the bound is claimed; no multiplier attaining it is constructed.
pub fn generalized_ceiling<S: Scalar>(pipeline: &Pipeline<S>, authority: &AuthoritySpec<S>) -> Result<S, Error> {
    let positions = authority.positions(pipeline)?;
    let bounds = authority.assist_bound.as_ref().ok_or(Error::MissingAssistBounds)?;
    let caps = pipeline.capacities();
    let stages = pipeline.stages();
    Ok(min_of(positions.into_iter().map(|i| bounds[&stages[i]].clone() * caps[i].clone()))
        .expect("human set is nonempty"))
}

/// Machine stages (`V \ H`) in stage order.
pub fn machine_stages<S: Scalar>(pipeline: &Pipeline<S>, authority: &AuthoritySpec<S>) -> Vec<StageId> {
    pipeline
        .stages()
        .iter()
        .filter(|s| !authority.is_human(s.as_str()))
        .cloned()
        .collect()
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

    fn human(ids: &[&str]) -> AuthoritySpec<Q> {
        AuthoritySpec::new(ids.iter().copied())
    }

    #[test]
    fn ceiling_examples() {
        let p = example();
        assert_eq!(ceiling(&p, &human(&["a"])).unwrap(), q(3));
        assert_eq!(ceiling(&p, &human(&["a", "c"])).unwrap(), q(3));
        assert_eq!(ceiling(&p, &human(&["a", "b", "c"])).unwrap(), p.throughput());
    }

    #[test]
    fn ceiling_errors() {
        let p = example();
        assert_eq!(ceiling(&p, &human(&[])), Err(Error::EmptyHumanSet));
        assert_eq!(ceiling(&p, &human(&["zz"])), Err(Error::UnknownHumanStage("zz".into())));
        assert_eq!(tightness_witness(&p, &human(&[])), Err(Error::EmptyHumanSet));
    }

    #[test]
    fn h_admissibility() {
        let p = example();
        let h = human(&["a"]);
        assert!(is_h_admissible(&Multiplier::identity(&p), &h));
        assert!(!is_h_admissible(&Multiplier::with_overrides(&p, [("a", q(2))]).unwrap(), &h));
        let fast = Multiplier::with_overrides(&p, [("b", q(100)), ("c", q(100))]).unwrap();
        assert!(is_h_admissible(&fast, &h));
    }

    #[test]
    fn witness_for_first_stage_human() {
        // C_H = 3, slowest machine capacity 1, factor ceil(3/1) + 1 = 4.
        let p = example();
        let h = human(&["a"]);
        let w = tightness_witness(&p, &h).unwrap();
        assert_eq!(w.factor("a"), Some(&q(1)));
        assert_eq!(w.factor("b"), Some(&q(4)));
        assert_eq!(w.factor("c"), Some(&q(4)));
        assert_eq!(p.perturb(&w).unwrap().capacities(), &[q(3), q(4), q(16)]);
        assert_eq!(p.perturbed_throughput(&w).unwrap(), q(3));
    }

    #[test]
    fn witness_for_last_stage_human() {
        // C_H = 4, slowest machine capacity 1, factor 5.
        let p = example();
        let w = tightness_witness(&p, &human(&["c"])).unwrap();
        assert_eq!(p.perturb(&w).unwrap().capacities(), &[q(15), q(5), q(4)]);
        assert_eq!(p.perturbed_throughput(&w).unwrap(), q(4));
    }

    #[test]
    fn witness_with_all_stages_human_is_identity() {
        let p = example();
        let w = tightness_witness(&p, &human(&["a", "b", "c"])).unwrap();
        assert!(w.is_identity());
        assert_eq!(p.perturbed_throughput(&w).unwrap(), p.throughput());
    }

    #[test]
    fn witness_with_fractional_ratio_uses_exact_ceiling() {
        let p = Pipeline::new([("h", Q::from_ratio(7, 2)), ("m", q(2))]).unwrap();
        let w = tightness_witness(&p, &human(&["h"])).unwrap();
        // ceil(7/4) + 1 = 3
        assert_eq!(w.factor("m"), Some(&q(3)));
        assert_eq!(p.perturbed_throughput(&w).unwrap(), Q::from_ratio(7, 2));
    }

    #[test]
    fn generalized_ceiling_examples() {
        let p = example();
        let a = human(&["a"]).with_assist_bounds([("a", q(2))]).unwrap();
        assert_eq!(generalized_ceiling(&p, &a).unwrap(), q(6));

        let ac = human(&["a", "c"]).with_assist_bounds([("a", q(2)), ("c", q(1))]).unwrap();
        assert_eq!(generalized_ceiling(&p, &ac).unwrap(), q(4));

        let ones = human(&["a", "c"]).with_assist_bounds([("a", q(1)), ("c", q(1))]).unwrap();
        assert_eq!(generalized_ceiling(&p, &ones).unwrap(), ceiling(&p, &ones).unwrap());

        assert_eq!(generalized_ceiling(&p, &human(&["a"])), Err(Error::MissingAssistBounds));
    }

    #[test]
    fn assist_bounds_are_validated() {
        let h = human(&["a", "c"]);
        assert_eq!(
            h.clone().with_assist_bounds([("a", q(2))]).unwrap_err(),
            Error::AssistDomain("c".into())
        );
        assert_eq!(
            h.clone().with_assist_bounds([("a", q(2)), ("b", q(2))]).unwrap_err(),
            Error::AssistDomain("b".into())
        );
        assert!(matches!(
            h.with_assist_bounds([("a", Q::from_ratio(1, 2)), ("c", q(1))]),
            Err(Error::AssistBoundBelowOne { .. })
        ));
    }

    fn grid(i: usize) -> Q {
        [q(1), q(1), Q::from_ratio(3, 2), q(2), q(5)][i].clone()
    }

    fn instance() -> impl Strategy<Value = (Vec<i64>, Vec<usize>, Vec<bool>, Vec<usize>)> {
        (1usize..=6).prop_flat_map(|n| {
            (
                prop::collection::vec(1i64..=10, n),
                prop::collection::vec(0usize..5, n),
                prop::collection::vec(any::<bool>(), n),
                prop::collection::vec(0usize..5, n),
            )
        })
    }

    proptest! {
        #[test]
        fn ceiling_bounds_and_witness_attains((caps, picks, is_human, assist) in instance()) {
            let p = Pipeline::new(caps.iter().enumerate().map(|(i, &c)| (format!("s{i}"), q(c)))).unwrap();
            let mut ids: Vec<String> = (0..caps.len()).filter(|&i| is_human[i]).map(|i| format!("s{i}")).collect();
            if ids.is_empty() {
                ids.push("s0".into());
            }
            let h = AuthoritySpec::<Q>::new(ids.iter().cloned());
            let bound = ceiling(&p, &h).unwrap();

            let m = Multiplier::new(p.stages().iter().enumerate().map(|(i, s)| {
                (s.clone(), if h.is_human(s.as_str()) { q(1) } else { grid(picks[i]) })
            })).unwrap();
            prop_assert!(is_h_admissible(&m, &h));
            prop_assert!(p.perturbed_throughput(&m).unwrap() <= bound.clone());

            let w = tightness_witness(&p, &h).unwrap();
            prop_assert!(is_h_admissible(&w, &h));
            prop_assert_eq!(p.perturbed_throughput(&w).unwrap(), bound.clone());
            for s in machine_stages(&p, &h) {
                let product = w.factor(s.as_str()).unwrap().clone() * p.capacity(s.as_str()).unwrap().clone();
                prop_assert!(product > bound);
            }

            // Assisted human stages stay under the generalised bound.
            let bounds: Vec<(String, Q)> = ids.iter().map(|s| {
                let i: usize = s[1..].parse().unwrap();
                (s.clone(), grid(assist[i]))
            }).collect();
            let ha = h.clone().with_assist_bounds(bounds.clone()).unwrap();
            let assisted = Multiplier::new(p.stages().iter().enumerate().map(|(i, s)| {
                let f = match bounds.iter().find(|(id, _)| id == s.as_str()) {
                    Some((_, b)) if picks[i] % 2 == 0 => b.clone(),
                    Some(_) => q(1),
                    None => grid(picks[i]),
                };
                (s.clone(), f)
            })).unwrap();
            prop_assert!(p.perturbed_throughput(&assisted).unwrap() <= generalized_ceiling(&p, &ha).unwrap());
        }
    }
}
