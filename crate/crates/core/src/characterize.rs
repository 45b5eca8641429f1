//! When does a perturbation change throughput, and when does it move the
//! bottleneck?
//!
//! Each report computes the observable side (throughput comparison, set
//! comparison) and the predicate side (conditions on the factors of the
//! original bottlenecks) separately, so the two can be checked against each
//! other by [`verify_characterizations`].

use crate::model::{mask_of_minimum, Multiplier, Pipeline, StageId};
use crate::scalar::Scalar;
use crate::verdict::{list, Counterexample, Verdict};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Unchanged,
    StrictIncrease,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationClassification {
    /// Observed by comparing perturbed and original throughput.
    pub outcome: Outcome,
    /// Some original bottleneck keeps factor exactly 1.
    pub some_bottleneck_unimproved: bool,
    /// Every original bottleneck has factor above 1.
    pub all_bottlenecks_improved: bool,
    /// Earliest bottleneck with factor 1, when there is one.
    pub witness: Option<StageId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreservationReport<S> {
    /// Observed: the perturbed bottleneck set equals the original one.
    pub preserved: bool,
    /// All original bottlenecks share one factor.
    pub equal_bottleneck_factors: bool,
    /// Every perturbed bottleneck capacity is below every perturbed
    /// non-bottleneck capacity (vacuous when all stages are bottlenecks).
    pub bottlenecks_stay_below_rest: bool,
    pub common_factor: Option<S>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MigrationDecomposition {
    /// Original bottlenecks that are no longer bottlenecks.
    pub departed: Vec<StageId>,
    /// New bottlenecks that were not bottlenecks before.
    pub entered: Vec<StageId>,
}

impl MigrationDecomposition {
    pub fn is_empty(&self) -> bool {
        self.departed.is_empty() && self.entered.is_empty()
    }
}

pub fn classify<S: Scalar>(
    pipeline: &Pipeline<S>,
    multiplier: &Multiplier<S>,
) -> Result<PerturbationClassification, Error> {
    let factors = pipeline.aligned_factors(multiplier)?;
    let before = pipeline.throughput();
    let after = pipeline.perturbed_throughput(multiplier)?;
    let outcome = if after == before {
        Outcome::Unchanged
    } else if after > before {
        Outcome::StrictIncrease
    } else {
        return Err(Error::Inconsistent(format!(
            "throughput fell from {before} to {after} under an admissible multiplier"
        )));
    };

    let one = S::one();
    let mask = pipeline.bottleneck_mask();
    let bottleneck_factors: Vec<(usize, &S)> = factors
        .iter()
        .enumerate()
        .filter(|(i, _)| mask[*i])
        .map(|(i, f)| (i, *f))
        .collect();
    let witness = bottleneck_factors
        .iter()
        .find(|(_, f)| **f == one)
        .map(|(i, _)| pipeline.stages()[*i].clone());

    Ok(PerturbationClassification {
        outcome,
        some_bottleneck_unimproved: bottleneck_factors.iter().any(|(_, f)| **f == one),
        all_bottlenecks_improved: bottleneck_factors.iter().all(|(_, f)| **f > one),
        witness,
    })
}

pub fn preservation_report<S: Scalar>(
    pipeline: &Pipeline<S>,
    multiplier: &Multiplier<S>,
) -> Result<PreservationReport<S>, Error> {
    let factors = pipeline.aligned_factors(multiplier)?;
    let products = pipeline.perturbed_capacities(multiplier)?;
    let before = pipeline.bottleneck_mask();
    let after = mask_of_minimum(&products);

    let mut bottleneck_factors = factors.iter().zip(&before).filter(|(_, &b)| b).map(|(f, _)| *f);
    let first = bottleneck_factors.next().expect("bottleneck set is nonempty");
    let equal_bottleneck_factors = bottleneck_factors.all(|f| f == first);

    let bottleneck_products = products.iter().zip(&before).filter(|(_, &b)| b).map(|(p, _)| p);
    let other_products: Vec<&S> = products.iter().zip(&before).filter(|(_, &b)| !b).map(|(p, _)| p).collect();
    let bottlenecks_stay_below_rest =
        bottleneck_products.clone().all(|u| other_products.iter().all(|w| u < *w));

    Ok(PreservationReport {
        preserved: before == after,
        equal_bottleneck_factors,
        bottlenecks_stay_below_rest,
        common_factor: equal_bottleneck_factors.then(|| first.clone()),
    })
}

pub fn migration_decomposition<S: Scalar>(
    pipeline: &Pipeline<S>,
    multiplier: &Multiplier<S>,
) -> Result<MigrationDecomposition, Error> {
    let before = pipeline.bottleneck_mask();
    let after = mask_of_minimum(&pipeline.perturbed_capacities(multiplier)?);
    let pick = |keep: fn(bool, bool) -> bool| {
        pipeline
            .stages()
            .iter()
            .enumerate()
            .filter(|(i, _)| keep(before[*i], after[*i]))
            .map(|(_, s)| s.clone())
            .collect()
    };
    Ok(MigrationDecomposition {
        departed: pick(|b, a| b && !a),
        entered: pick(|b, a| !b && a),
    })
}

/// Everything computed about one perturbation, as handed to the checker.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacterizationReports<S> {
    pub classification: PerturbationClassification,
    pub preservation: PreservationReport<S>,
    pub migration: MigrationDecomposition,
    pub migration_occurred: bool,
}

pub fn characterize<S: Scalar>(
    pipeline: &Pipeline<S>,
    multiplier: &Multiplier<S>,
) -> Result<CharacterizationReports<S>, Error> {
    Ok(CharacterizationReports {
        classification: classify(pipeline, multiplier)?,
        preservation: preservation_report(pipeline, multiplier)?,
        migration: migration_decomposition(pipeline, multiplier)?,
        migration_occurred: pipeline.migration_occurred(multiplier)?,
    })
}

/// Computes every report and cross-checks it against a brute-force oracle.
pub fn verify_characterizations<S: Scalar>(
    pipeline: &Pipeline<S>,
    multiplier: &Multiplier<S>,
) -> Result<Verdict, Error> {
    let reports = characterize(pipeline, multiplier)?;
    check_characterizations(pipeline, multiplier, &reports)
}

/// Indices attaining the minimum, found by pairwise comparison only.
fn pairwise_minimisers<S: Scalar>(values: &[S]) -> Vec<usize> {
    (0..values.len())
        .filter(|&i| values.iter().all(|w| values[i] <= *w))
        .collect()
}

/// Checks `reports` for `(pipeline, multiplier)` against a recomputation
/// that shares no code with the report builders: minima come from pairwise
/// comparisons and the perturbed pipeline is materialised explicitly.
pub fn check_characterizations<S: Scalar>(
    pipeline: &Pipeline<S>,
    multiplier: &Multiplier<S>,
    reports: &CharacterizationReports<S>,
) -> Result<Verdict, Error> {
    let factors = pipeline.aligned_factors(multiplier)?;
    let perturbed = pipeline.perturb(multiplier)?;
    let caps = pipeline.capacities();
    let new_caps = perturbed.capacities();
    let one = S::one();

    let b = pairwise_minimisers(caps);
    let b_new = pairwise_minimisers(new_caps);
    let t = caps[b[0]].clone();
    let t_new = new_caps[b_new[0]].clone();
    let name = |i: &usize| pipeline.stages()[*i].clone();

    let unchanged = t_new == t;
    let increased = t_new > t;
    let exists_unit = b.iter().any(|&i| *factors[i] == one);
    let all_above = b.iter().all(|&i| *factors[i] > one);

    let cond_i = b.iter().all(|&i| factors[i] == factors[b[0]]);
    let cond_ii = b.iter().all(|&u| {
        (0..caps.len())
            .filter(|w| !b.contains(w))
            .all(|w| new_caps[u] < new_caps[w])
    });
    let preserved = b == b_new;
    let departed: Vec<StageId> = b.iter().filter(|i| !b_new.contains(i)).map(name).collect();
    let entered: Vec<StageId> = b_new.iter().filter(|i| !b.contains(i)).map(name).collect();

    let c = &reports.classification;
    let p = &reports.preservation;
    let m = &reports.migration;
    let witness_ok = match (&c.witness, c.outcome) {
        (Some(w), Outcome::Unchanged) => {
            let idx = pipeline.position(w.as_str());
            idx.is_some_and(|i| b.contains(&i) && *factors[i] == one)
        }
        (None, Outcome::StrictIncrease) => true,
        _ => false,
    };

    let checks: [(&str, bool); 14] = [
        ("non_decrease", t_new >= t),
        ("outcome_matches_oracle", (c.outcome == Outcome::Unchanged) == unchanged),
        ("invariance_predicate_matches_oracle", c.some_bottleneck_unimproved == exists_unit),
        ("invariance_biconditional", unchanged == exists_unit && (c.outcome == Outcome::Unchanged) == c.some_bottleneck_unimproved),
        ("strict_predicate_matches_oracle", c.all_bottlenecks_improved == all_above),
        ("strict_biconditional", increased == all_above && (c.outcome == Outcome::StrictIncrease) == c.all_bottlenecks_improved),
        ("predicates_exclusive", c.some_bottleneck_unimproved != c.all_bottlenecks_improved),
        ("witness", witness_ok),
        ("non_bottleneck_corollary", !b.iter().all(|&i| *factors[i] == one) || unchanged),
        ("preservation_observed", p.preserved == preserved),
        (
            "preservation_conditions",
            p.equal_bottleneck_factors == cond_i
                && p.bottlenecks_stay_below_rest == cond_ii
                && p.common_factor.is_some() == cond_i
                && (b.len() < caps.len() || cond_ii),
        ),
        ("preservation_biconditional", p.preserved == (p.equal_bottleneck_factors && p.bottlenecks_stay_below_rest) && preserved == (cond_i && cond_ii)),
        ("migration_sets", m.departed == departed && m.entered == entered),
        ("migration_biconditional", reports.migration_occurred == !preserved && m.is_empty() != reports.migration_occurred),
    ];

    let Some((failed, _)) = checks.iter().find(|(_, ok)| !ok) else {
        return Ok(Verdict::Pass);
    };
    let names = |idx: &[usize]| list(&idx.iter().map(name).collect::<Vec<_>>());
    let factor_list: Vec<String> = factors.iter().map(|f| f.to_string()).collect();
    Ok(Verdict::Fail(
        Counterexample::new(*failed)
            .with("stages", list(pipeline.stages()))
            .with("capacities", list(caps))
            .with("factors", list(&factor_list))
            .with("perturbed_capacities", list(new_caps))
            .with("throughput", &t)
            .with("perturbed_throughput", &t_new)
            .with("bottlenecks", names(&b))
            .with("perturbed_bottlenecks", names(&b_new))
            .with("reported_outcome", format!("{:?}", c.outcome))
            .with("reported_some_unimproved", c.some_bottleneck_unimproved)
            .with("reported_all_improved", c.all_bottlenecks_improved)
            .with("reported_preserved", p.preserved)
            .with("reported_departed", list(&m.departed))
            .with("reported_entered", list(&m.entered)),
    ))
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

    fn pipe(caps: &[i64]) -> Pipeline<Q> {
        Pipeline::new(caps.iter().enumerate().map(|(i, &c)| (format!("s{i}"), q(c)))).unwrap()
    }

    fn mult(p: &Pipeline<Q>, factors: &[Q]) -> Multiplier<Q> {
        Multiplier::new(p.stages().iter().cloned().zip(factors.iter().cloned())).unwrap()
    }

    fn example() -> Pipeline<Q> {
        Pipeline::new([("a", q(3)), ("b", q(1)), ("c", q(4))]).unwrap()
    }

    #[test]
    fn unimproved_bottleneck_keeps_throughput() {
        let p = example();
        let c = classify(&p, &mult(&p, &[q(10), q(1), q(10)])).unwrap();
        assert_eq!(c.outcome, Outcome::Unchanged);
        assert!(c.some_bottleneck_unimproved && !c.all_bottlenecks_improved);
        assert_eq!(c.witness, Some("b".into()));
    }

    #[test]
    fn improving_sole_bottleneck_raises_throughput() {
        let p = example();
        let c = classify(&p, &mult(&p, &[q(1), q(2), q(1)])).unwrap();
        assert_eq!(c.outcome, Outcome::StrictIncrease);
        assert!(c.all_bottlenecks_improved);
        assert_eq!(c.witness, None);
    }

    #[test]
    fn one_tied_bottleneck_left_alone_pins_throughput() {
        let p = pipe(&[2, 2, 5]);
        let c = classify(&p, &mult(&p, &[q(3), q(1), q(1)])).unwrap();
        assert_eq!(c.outcome, Outcome::Unchanged);
        assert_eq!(c.witness, Some("s1".into()));
    }

    #[test]
    fn witness_is_earliest_unit_bottleneck() {
        let p = pipe(&[2, 2, 2]);
        let c = classify(&p, &mult(&p, &[q(3), q(1), q(1)])).unwrap();
        assert_eq!(c.witness, Some("s1".into()));
    }

    #[test]
    fn preservation_examples() {
        let p = example();
        let kept = preservation_report(&p, &mult(&p, &[q(1), q(2), q(1)])).unwrap();
        assert!(kept.preserved && kept.equal_bottleneck_factors && kept.bottlenecks_stay_below_rest);
        assert_eq!(kept.common_factor, Some(q(2)));

        let moved = preservation_report(&p, &mult(&p, &[q(1), q(5), q(1)])).unwrap();
        assert!(!moved.preserved && !moved.bottlenecks_stay_below_rest);
        assert!(moved.equal_bottleneck_factors);

        let flat = pipe(&[3, 3, 3]);
        let uniform = preservation_report(&flat, &Multiplier::uniform(&flat, q(2)).unwrap()).unwrap();
        assert!(uniform.preserved && uniform.bottlenecks_stay_below_rest);
    }

    #[test]
    fn unequal_factors_on_ties_break_preservation() {
        let p = pipe(&[2, 2, 9]);
        let r = preservation_report(&p, &mult(&p, &[q(2), q(3), q(1)])).unwrap();
        assert!(!r.preserved && !r.equal_bottleneck_factors && r.common_factor.is_none());
    }

    #[test]
    fn migration_examples() {
        let p = example();
        let moved = migration_decomposition(&p, &mult(&p, &[q(1), q(5), q(1)])).unwrap();
        assert_eq!(moved.departed, vec![StageId::from("b")]);
        assert_eq!(moved.entered, vec![StageId::from("a")]);

        assert!(migration_decomposition(&p, &Multiplier::identity(&p)).unwrap().is_empty());

        let tied = pipe(&[2, 2, 5]);
        let d = migration_decomposition(&tied, &mult(&tied, &[q(1), q(3), q(1)])).unwrap();
        assert_eq!(d.departed, vec![StageId::from("s1")]);
        assert!(d.entered.is_empty());
    }

    #[test]
    fn verification_passes_on_worked_example_and_degenerate_pipeline() {
        let p = example();
        for f in [[1, 1, 1], [1, 2, 1], [1, 5, 1], [10, 1, 10], [2, 3, 2]] {
            let m = mult(&p, &f.map(q));
            assert_eq!(verify_characterizations(&p, &m).unwrap(), Verdict::Pass);
        }
        let single = pipe(&[7]);
        let id = Multiplier::identity(&single);
        assert_eq!(verify_characterizations(&single, &id).unwrap(), Verdict::Pass);
        assert_eq!(classify(&single, &id).unwrap().outcome, Outcome::Unchanged);
    }

    #[test]
    fn tampered_report_yields_counterexample_with_state() {
        let p = example();
        let m = mult(&p, &[q(1), q(2), q(1)]);
        let mut reports = characterize(&p, &m).unwrap();
        reports.classification.some_bottleneck_unimproved = true;
        match check_characterizations(&p, &m, &reports).unwrap() {
            Verdict::Fail(cx) => {
                assert_eq!(cx.check, "invariance_predicate_matches_oracle");
                assert!(cx.state.iter().any(|(k, v)| k == "perturbed_capacities" && v == "[3, 2, 4]"));
            }
            Verdict::Pass => panic!("tampering went unnoticed"),
        }
    }

    fn instance() -> impl Strategy<Value = (Vec<i64>, Vec<i64>)> {
        (1usize..=6).prop_flat_map(|n| {
            (
                prop::collection::vec(1i64..=5, n),
                // Index into {1, 1, 3/2, 2, 5}.
                prop::collection::vec(0i64..5, n),
            )
        })
    }

    fn grid(i: i64) -> Q {
        [q(1), q(1), Q::from_ratio(3, 2), q(2), q(5)][i as usize].clone()
    }

    proptest! {
        #[test]
        fn characterizations_agree_with_oracle((caps, picks) in instance()) {
            let p = pipe(&caps);
            let m = mult(&p, &picks.iter().map(|&i| grid(i)).collect::<Vec<_>>());
            prop_assert_eq!(verify_characterizations(&p, &m).unwrap(), Verdict::Pass);
        }

        #[test]
        fn improving_all_but_one_tied_bottleneck_changes_nothing(
            (caps, picks) in instance(),
            spared in 0usize..6,
        ) {
            let p = pipe(&caps);
            let mask = p.bottleneck_mask();
            let tied: Vec<usize> = (0..caps.len()).filter(|&i| mask[i]).collect();
            prop_assume!(tied.len() >= 2);
            let keep = tied[spared % tied.len()];
            let factors: Vec<Q> = (0..caps.len())
                .map(|i| if i == keep { q(1) } else if mask[i] { q(3) } else { grid(picks[i]) })
                .collect();
            let m = mult(&p, &factors);
            prop_assert_eq!(p.perturbed_throughput(&m).unwrap(), p.throughput());
        }
    }
}
