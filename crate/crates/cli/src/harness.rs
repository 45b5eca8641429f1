//! Randomized verification of every characterisation, bound and equivalence
//! over generated instances.
//!
//! Each instance is checked independently and contributes tallies; the only
//! join point is the in-order merge at the end, so reports are identical
//! for identical `(seed, count, max_stages)` regardless of thread count.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use toc_core::adversarial::{defender_misses_bottleneck, ratio_report, PipePair};
use toc_core::ceiling::{ceiling, generalized_ceiling, is_h_admissible, machine_stages, tightness_witness, AuthoritySpec};
use toc_core::characterize::{characterize, check_characterizations, Outcome};
use toc_core::exact::fraction_string;
use toc_core::falsepos::{
    decline_check, plateau_check, repaired_useful, simple_useful, DeclineVerdict, FixedFractionModel, PrecisionFunction,
    Value,
};
use toc_core::scalar::min_of;
use toc_core::{Multiplier, Rational, RationalMultiplier, RationalPipeline, Scalar, StageId, Verdict};

use crate::generator::{draw_instance, instance_stream, GeneratorConfig, InstanceRng};
use crate::CliError;

/// Every check the harness runs, in report order.
pub const CHECKS: &[&str] = &[
    "adversarial_equivalence",
    "adversarial_scale",
    "bottleneck_existence",
    "ceiling_bound",
    "ceiling_full_authority",
    "ceiling_tightness",
    "constant_collapse",
    "constant_reduction",
    "defender_miss_corollary",
    "exponential_decline",
    "generalized_ceiling_bound",
    "generalized_ceiling_reduction",
    "invariance",
    "migration",
    "monotonicity",
    "non_bottleneck_corollary",
    "non_decrease",
    "normal_form",
    "oracle_crosscheck",
    "perturbation_closure",
    "plateau",
    "preservation",
    "rational_decline",
    "strict_improvement",
    "strict_minimum",
    "table_decline",
    "tied_sharpness",
    "tied_single_unimproved",
];

/// Instance statistics reported alongside the checks.
pub const STATISTICS: &[&str] = &[
    "migrations",
    "strict_increases",
    "tied_instances",
    "unit_bottleneck_instances",
];

/// Deliberate corruption of computed results, used to show that the
/// harness notices defects.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mutation {
    #[default]
    None,
    /// Negate the "some bottleneck unimproved" predicate.
    FlipInvariancePredicate,
    /// Negate the observed bottleneck-preservation flag.
    FlipPreserved,
    /// Negate the ratio comparison in the attacker/defender report.
    FlipFavoursAttacker,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CheckTally {
    pub checked: u64,
    /// Instances on which the check's hypothesis held (for conditional
    /// checks) or its predicate was true (for biconditionals).
    pub hypothesis_held: u64,
    pub violations: u64,
}

impl CheckTally {
    fn absorb(&mut self, other: &CheckTally) {
        self.checked += other.checked;
        self.hypothesis_held += other.hypothesis_held;
        self.violations += other.violations;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HarnessCounterexample {
    pub check: String,
    pub seed: u64,
    pub index: usize,
    pub state: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HarnessReport {
    pub seed: u64,
    pub instance_count: usize,
    pub max_stages: usize,
    pub checks: BTreeMap<String, CheckTally>,
    pub statistics: BTreeMap<String, u64>,
    pub total_violations: u64,
    /// The first few counterexamples in index order, each replayable from
    /// `(seed, index)`.
    pub counterexamples: Vec<HarnessCounterexample>,
}

impl HarnessReport {
    pub fn passed(&self) -> bool {
        self.total_violations == 0
    }

    pub fn tally(&self, check: &str) -> CheckTally {
        self.checks.get(check).copied().unwrap_or_default()
    }

    pub fn statistic(&self, name: &str) -> u64 {
        self.statistics.get(name).copied().unwrap_or(0)
    }
}

const KEPT_COUNTEREXAMPLES: usize = 20;

pub fn verify_all(cfg: &GeneratorConfig) -> Result<HarnessReport, CliError> {
    verify_all_with(cfg, Mutation::None)
}

pub fn verify_all_with(cfg: &GeneratorConfig, mutation: Mutation) -> Result<HarnessReport, CliError> {
    cfg.validate()?;
    let per_instance: Vec<Recorder> = (0..cfg.instance_count)
        .into_par_iter()
        .map(|index| run_instance(cfg, index, mutation))
        .collect();

    let mut checks: BTreeMap<String, CheckTally> = CHECKS.iter().map(|c| (c.to_string(), CheckTally::default())).collect();
    let mut statistics: BTreeMap<String, u64> = STATISTICS.iter().map(|s| (s.to_string(), 0)).collect();
    let mut counterexamples = Vec::new();
    for (index, rec) in per_instance.into_iter().enumerate() {
        for (name, tally) in &rec.tallies {
            checks.get_mut(*name).expect("check is registered").absorb(tally);
        }
        for (name, n) in &rec.statistics {
            *statistics.get_mut(*name).expect("statistic is registered") += n;
        }
        for (check, state) in rec.failures {
            if counterexamples.len() < KEPT_COUNTEREXAMPLES {
                counterexamples.push(HarnessCounterexample {
                    check: check.to_string(),
                    seed: cfg.seed,
                    index,
                    state,
                });
            }
        }
    }
    let total_violations = checks.values().map(|t| t.violations).sum();
    Ok(HarnessReport {
        seed: cfg.seed,
        instance_count: cfg.instance_count,
        max_stages: cfg.max_stages,
        checks,
        statistics,
        total_violations,
        counterexamples,
    })
}

type State = Vec<(String, String)>;

#[derive(Default)]
struct Recorder {
    tallies: BTreeMap<&'static str, CheckTally>,
    statistics: BTreeMap<&'static str, u64>,
    failures: Vec<(&'static str, State)>,
}

impl Recorder {
    fn record(&mut self, check: &'static str, hypothesis: bool, ok: bool, state: impl FnOnce() -> State) {
        debug_assert!(CHECKS.contains(&check), "unregistered check {check}");
        let tally = self.tallies.entry(check).or_default();
        tally.checked += 1;
        tally.hypothesis_held += u64::from(hypothesis);
        if !ok {
            tally.violations += 1;
            self.failures.push((check, state()));
        }
    }

    fn count(&mut self, name: &'static str, hit: bool) {
        *self.statistics.entry(name).or_default() += u64::from(hit);
    }
}

fn q(n: i64) -> Rational {
    Rational::from_int(n)
}

fn fractions<'a>(values: impl IntoIterator<Item = &'a Rational>) -> String {
    let inner: Vec<String> = values.into_iter().map(fraction_string).collect();
    format!("[{}]", inner.join(", "))
}

fn describe(p: &RationalPipeline, a: &RationalMultiplier) -> State {
    let factors: Vec<&Rational> = p.stages().iter().map(|s| a.factor(s.as_str()).expect("aligned")).collect();
    vec![
        ("stages".into(), format!("{:?}", p.stages().iter().map(StageId::as_str).collect::<Vec<_>>())),
        ("capacities".into(), fractions(p.capacities())),
        ("factors".into(), fractions(factors)),
    ]
}

fn with(mut state: State, extra: &[(&str, String)]) -> State {
    state.extend(extra.iter().map(|(k, v)| (k.to_string(), v.clone())));
    state
}

/// Same multiplier with the listed stages reset to `factor`.
fn overridden(p: &RationalPipeline, a: &RationalMultiplier, stages: &[StageId], factor: &Rational) -> RationalMultiplier {
    Multiplier::new(p.stages().iter().map(|s| {
        let f = if stages.contains(s) { factor.clone() } else { a.factor(s.as_str()).expect("aligned").clone() };
        (s.clone(), f)
    }))
    .expect("factors stay at least 1")
}

fn run_instance(cfg: &GeneratorConfig, index: usize, mutation: Mutation) -> Recorder {
    let (instance, mut rng) = instance_stream(cfg, index);
    let mut rec = Recorder::default();
    core_checks(cfg, &instance.pipeline, &instance.multiplier, &mut rng, mutation, &mut rec);
    ceiling_checks(cfg, &instance.pipeline, &instance.multiplier, &mut rng, &mut rec);
    adversarial_checks(cfg, &instance.pipeline, &instance.multiplier, &mut rng, mutation, &mut rec);
    false_positive_checks(cfg, &mut rng, &mut rec);
    rec
}

fn core_checks(
    cfg: &GeneratorConfig,
    p: &RationalPipeline,
    a: &RationalMultiplier,
    rng: &mut InstanceRng,
    mutation: Mutation,
    rec: &mut Recorder,
) {
    let base = || describe(p, a);
    let one = q(1);
    let t = p.throughput();
    let report = p.bottleneck_report();
    let bottleneck_caps_ok = report.bottlenecks.iter().all(|b| p.capacity(b.as_str()) == Some(&t));
    let others_ok = report.non_bottlenecks.iter().all(|s| p.capacity(s.as_str()).is_some_and(|c| *c > t));
    rec.record(
        "bottleneck_existence",
        true,
        !report.bottlenecks.is_empty()
            && bottleneck_caps_ok
            && others_ok
            && report.bottlenecks.len() + report.non_bottlenecks.len() == p.len(),
        base,
    );

    let perturbed = match p.perturb(a) {
        Ok(perturbed) => perturbed,
        Err(e) => {
            rec.record("perturbation_closure", true, false, || with(base(), &[("error", e.to_string())]));
            return;
        }
    };
    rec.record(
        "perturbation_closure",
        true,
        perturbed.stages() == p.stages() && perturbed.capacities().iter().all(Scalar::is_positive),
        base,
    );
    let t_new = perturbed.throughput();
    let direct = p.perturbed_throughput(a).expect("admissible");
    rec.record("normal_form", true, direct == t_new, || {
        with(base(), &[("direct", fraction_string(&direct)), ("materialised", fraction_string(&t_new))])
    });
    rec.record("non_decrease", true, t_new >= t, base);

    let dominating = Multiplier::new(
        p.stages()
            .iter()
            .map(|s| (s.clone(), a.factor(s.as_str()).expect("aligned").clone() * rng.pick(&cfg.factor_grid).clone()))
            .collect::<Vec<_>>(),
    )
    .expect("products of factors >= 1");
    let t_dom = p.perturbed_throughput(&dominating).expect("admissible");
    rec.record("monotonicity", true, t_new <= t_dom, || {
        with(base(), &[("dominated", fraction_string(&t_new)), ("dominating", fraction_string(&t_dom))])
    });

    let family: Vec<Rational> = (0..=rng.below(5)).map(|_| t.clone() + rng.pick(&cfg.capacity_grid).clone()).collect();
    let family_min = min_of(family.iter().cloned()).expect("nonempty family");
    rec.record("strict_minimum", true, family_min > t, || with(base(), &[("family", fractions(&family))]));

    let mut reports = characterize(p, a).expect("admissible");
    match mutation {
        Mutation::FlipInvariancePredicate => {
            reports.classification.some_bottleneck_unimproved = !reports.classification.some_bottleneck_unimproved
        }
        Mutation::FlipPreserved => reports.preservation.preserved = !reports.preservation.preserved,
        _ => {}
    }
    let verdict = check_characterizations(p, a, &reports).expect("admissible");
    let oracle_state = match &verdict {
        Verdict::Pass => Vec::new(),
        Verdict::Fail(cx) => with(cx.state.clone(), &[("failed", cx.check.clone())]),
    };
    rec.record("oracle_crosscheck", true, verdict.is_pass(), || oracle_state);

    let c = &reports.classification;
    let unchanged = t_new == t;
    let state_with_throughputs = || {
        with(base(), &[("throughput", fraction_string(&t)), ("perturbed_throughput", fraction_string(&t_new))])
    };
    rec.record(
        "invariance",
        c.some_bottleneck_unimproved,
        unchanged == c.some_bottleneck_unimproved && (c.outcome == Outcome::Unchanged) == unchanged,
        state_with_throughputs,
    );
    rec.record(
        "strict_improvement",
        c.all_bottlenecks_improved,
        (t_new > t) == c.all_bottlenecks_improved && (c.outcome == Outcome::StrictIncrease) == (t_new > t),
        state_with_throughputs,
    );
    rec.count("strict_increases", t_new > t);

    let reset = overridden(p, a, &report.bottlenecks, &one);
    rec.record("non_bottleneck_corollary", true, p.perturbed_throughput(&reset).expect("admissible") == t, base);

    let tied = report.bottlenecks.len() >= 2;
    let unit_bottlenecks = report.bottlenecks.iter().filter(|b| a.factor(b.as_str()) == Some(&one)).count();
    rec.count("tied_instances", tied);
    rec.count("unit_bottleneck_instances", unit_bottlenecks > 0);
    let single = tied && unit_bottlenecks == 1;
    rec.record("tied_single_unimproved", single, !single || unchanged, state_with_throughputs);
    if tied {
        let spared = rng.below(report.bottlenecks.len());
        let improved: Vec<StageId> =
            report.bottlenecks.iter().enumerate().filter(|(i, _)| *i != spared).map(|(_, s)| s.clone()).collect();
        let mut lifted = overridden(p, a, &improved, &q(2));
        lifted = overridden(p, &lifted, &report.bottlenecks[spared..=spared], &one);
        rec.record("tied_sharpness", true, p.perturbed_throughput(&lifted).expect("admissible") == t, || {
            with(base(), &[("spared", report.bottlenecks[spared].to_string())])
        });
    }

    let new_bottlenecks = perturbed.bottlenecks();
    let observed = new_bottlenecks == report.bottlenecks;
    let pr = &reports.preservation;
    let all_bottlenecks = report.non_bottlenecks.is_empty();
    rec.record(
        "preservation",
        observed,
        pr.preserved == observed
            && observed == (pr.equal_bottleneck_factors && pr.bottlenecks_stay_below_rest)
            && (!all_bottlenecks || pr.bottlenecks_stay_below_rest),
        || with(base(), &[("reported_preserved", pr.preserved.to_string()), ("observed_preserved", observed.to_string())]),
    );
    let occurred = p.migration_occurred(a).expect("admissible");
    rec.count("migrations", occurred);
    rec.record(
        "migration",
        occurred,
        occurred == !observed && reports.migration.is_empty() != occurred && reports.migration_occurred == occurred,
        base,
    );
}

fn ceiling_checks(
    cfg: &GeneratorConfig,
    p: &RationalPipeline,
    a: &RationalMultiplier,
    rng: &mut InstanceRng,
    rec: &mut Recorder,
) {
    let base = || describe(p, a);
    let mut human: Vec<StageId> = p.stages().iter().filter(|_| rng.coin()).cloned().collect();
    if human.is_empty() {
        human.push(rng.pick(p.stages()).clone());
    }
    let h = AuthoritySpec::new(human.iter().cloned());
    let human_state = || with(base(), &[("human", format!("{human:?}"))]);
    let bound = ceiling(p, &h).expect("nonempty human set of known stages");

    let restricted = overridden(p, a, &human, &q(1));
    let t_restricted = p.perturbed_throughput(&restricted).expect("admissible");
    rec.record("ceiling_bound", true, is_h_admissible(&restricted, &h) && t_restricted <= bound, human_state);

    let witness = tightness_witness(p, &h).expect("nonempty human set");
    let t_witness = p.perturbed_throughput(&witness).expect("admissible");
    let machine_above = machine_stages(p, &h).iter().all(|m| {
        witness.factor(m.as_str()).expect("aligned").clone() * p.capacity(m.as_str()).expect("known").clone() > bound
    });
    rec.record(
        "ceiling_tightness",
        human.len() == p.len(),
        is_h_admissible(&witness, &h) && t_witness == bound && machine_above,
        || with(human_state(), &[("ceiling", fraction_string(&bound)), ("witness_throughput", fraction_string(&t_witness))]),
    );

    let everyone = AuthoritySpec::new(p.stages().iter().cloned());
    let full_witness = tightness_witness(p, &everyone).expect("nonempty");
    let full_bound = ceiling(p, &everyone).expect("nonempty");
    rec.record(
        "ceiling_full_authority",
        true,
        full_bound == p.throughput()
            && full_witness.is_identity()
            && p.perturbed_throughput(&full_witness).expect("admissible") == full_bound,
        base,
    );

    let bounds: Vec<(StageId, Rational)> = human.iter().map(|s| (s.clone(), rng.pick(&cfg.factor_grid).clone())).collect();
    let assisted_spec = h.clone().with_assist_bounds(bounds.clone()).expect("bounds cover the human set");
    let general = generalized_ceiling(p, &assisted_spec).expect("bounds present");
    let assisted = Multiplier::new(p.stages().iter().map(|s| {
        let f = match bounds.iter().find(|(id, _)| id == s) {
            Some((_, b)) if rng.coin() => b.clone(),
            Some(_) => q(1),
            None => a.factor(s.as_str()).expect("aligned").clone(),
        };
        (s.clone(), f)
    }))
    .expect("factors at least 1");
    rec.record(
        "generalized_ceiling_bound",
        true,
        p.perturbed_throughput(&assisted).expect("admissible") <= general,
        human_state,
    );

    let unit_spec = h.with_assist_bounds(human.iter().map(|s| (s.clone(), q(1)))).expect("unit bounds");
    rec.record(
        "generalized_ceiling_reduction",
        true,
        generalized_ceiling(p, &unit_spec).expect("bounds present") == bound,
        human_state,
    );
}

fn adversarial_checks(
    cfg: &GeneratorConfig,
    attacker: &RationalPipeline,
    attacker_mult: &RationalMultiplier,
    rng: &mut InstanceRng,
    mutation: Mutation,
    rec: &mut Recorder,
) {
    let defender = draw_instance(cfg, rng);
    let pair = PipePair::new(attacker.clone(), defender.pipeline.clone());
    let state = || {
        let mut s = describe(attacker, attacker_mult);
        s.extend(describe(&defender.pipeline, &defender.multiplier).into_iter().map(|(k, v)| (format!("defender_{k}"), v)));
        s
    };

    let report = match ratio_report(&pair, attacker_mult, &defender.multiplier) {
        Ok(r) => r,
        Err(e) => {
            rec.record("adversarial_equivalence", false, false, || with(state(), &[("error", e.to_string())]));
            return;
        }
    };
    let favours = report.favours_attacker != (mutation == Mutation::FlipFavoursAttacker);

    // Independent recomputation from materialised perturbed pipelines.
    let ta = attacker.throughput();
    let td = defender.pipeline.throughput();
    let ta_new = attacker.perturb(attacker_mult).expect("admissible").throughput();
    let td_new = defender.pipeline.perturb(&defender.multiplier).expect("admissible").throughput();
    let ratio = ta_new.clone() / td_new.clone();
    let baseline = ta.clone() / td.clone();
    let gain_a = ta_new / ta;
    let gain_d = td_new / td;
    let ratio_rises = ratio > baseline;
    rec.record(
        "adversarial_equivalence",
        ratio_rises,
        favours == ratio_rises
            && ratio_rises == (gain_a > gain_d)
            && report.perturbed_ratio == ratio
            && report.baseline_ratio == baseline
            && report.attacker_gain == gain_a
            && report.defender_gain == gain_d,
        || with(state(), &[("ratio", fraction_string(&ratio)), ("baseline", fraction_string(&baseline))]),
    );

    match defender_misses_bottleneck(&pair, attacker_mult, &defender.multiplier) {
        Ok(misses) => rec.record("defender_miss_corollary", misses, !misses || favours, state),
        Err(e) => rec.record("defender_miss_corollary", true, false, || with(state(), &[("error", e.to_string())])),
    }

    let scale = rng.pick(&cfg.capacity_grid).clone() / rng.pick(&cfg.capacity_grid).clone();
    let rescaled = PipePair::new(attacker.clone(), defender.pipeline.scaled(&scale).expect("positive scale"));
    let ok = ratio_report(&rescaled, attacker_mult, &defender.multiplier).is_ok_and(|r2| {
        r2.baseline_ratio * scale.clone() == report.baseline_ratio
            && r2.perturbed_ratio * scale.clone() == report.perturbed_ratio
            && r2.favours_attacker == report.favours_attacker
    });
    rec.record("adversarial_scale", true, ok, || with(state(), &[("scale", fraction_string(&scale))]));
}

fn false_positive_checks(cfg: &GeneratorConfig, rng: &mut InstanceRng, rec: &mut Recorder) {
    let fraction = Rational::from_ratio(rng.below(20) as i64, 20);
    let capacity = rng.pick(&cfg.capacity_grid).clone();
    let mut samples = Vec::new();
    let mut rate = capacity.clone();
    for _ in 0..5 {
        rate += rng.pick(&cfg.capacity_grid).clone() / rng.pick(&cfg.capacity_grid).clone();
        samples.push(rate.clone());
    }
    let state = || {
        vec![
            ("fraction".to_string(), fraction_string(&fraction)),
            ("investigation_capacity".to_string(), fraction_string(&capacity)),
            ("samples".to_string(), fractions(&samples)),
        ]
    };

    let model = FixedFractionModel::new(fraction.clone(), capacity.clone()).expect("fraction below 1");
    let plateau = plateau_check(&model, &samples).expect("samples above capacity");
    let plateau_value = (q(1) - fraction.clone()) * capacity.clone();
    rec.record("plateau", true, plateau.holds && plateau.common_value == plateau_value, state);

    let constant = PrecisionFunction::constant(q(1) - fraction.clone()).expect("in [0, 1]");
    let reduced = samples.iter().all(|s| {
        repaired_useful(s, &constant, &capacity).ok().as_ref().and_then(Value::exact) == simple_useful(s, &model).ok().as_ref()
    });
    rec.record("constant_reduction", true, reduced, state);

    let level = Rational::from_ratio(rng.below(11) as i64, 10);
    let collapse = decline_check(&PrecisionFunction::constant(level.clone()).expect("in [0, 1]"), &capacity, &samples);
    let collapse_ok = matches!(&collapse, Ok(DeclineVerdict::Constant { value, holds: true }) if *value == level.clone() * capacity.clone());
    rec.record("constant_collapse", true, collapse_ok, state);

    let decay_rate = rng.pick(&cfg.capacity_grid).clone() / q(10);
    let decay = PrecisionFunction::rational_decay(decay_rate).expect("positive rate");
    rec.record(
        "rational_decline",
        true,
        decline_check(&decay, &capacity, &samples).is_ok_and(|v| v.holds()),
        state,
    );

    let exp_rate = rng.pick(&cfg.capacity_grid).clone() / q(100);
    let exp = PrecisionFunction::exponential_decay(exp_rate).expect("positive rate");
    rec.record(
        "exponential_decline",
        true,
        decline_check(&exp, &capacity, &samples).is_ok_and(|v| v.holds()),
        state,
    );

    // Strictly falling table starting at the capacity; samples are its
    // breakpoints and the midpoints between them.
    let mut breakpoints = vec![(capacity.clone(), q(1))];
    let mut drop = q(0);
    for _ in 0..4 {
        let (last_rate, _) = breakpoints.last().expect("nonempty").clone();
        drop += rng.pick(&cfg.capacity_grid).clone();
        breakpoints.push((last_rate + rng.pick(&cfg.capacity_grid).clone(), q(1) / (q(1) + drop.clone())));
    }
    let mut table_samples = Vec::new();
    for pair in breakpoints.windows(2) {
        table_samples.push((pair[0].0.clone() + pair[1].0.clone()) / q(2));
        table_samples.push(pair[1].0.clone());
    }
    let table = PrecisionFunction::table(breakpoints).expect("valid breakpoints");
    rec.record(
        "table_decline",
        true,
        table.validate_strictly_decreasing(&capacity).is_ok()
            && decline_check(&table, &capacity, &table_samples).is_ok_and(|v| v.holds()),
        || with(state(), &[("table_samples", fractions(&table_samples))]),
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_run_is_a_vacuous_pass() {
        let report = verify_all(&GeneratorConfig::new(1, 0)).unwrap();
        assert!(report.passed());
        assert_eq!(report.checks.len(), CHECKS.len());
        assert!(report.checks.values().all(|t| *t == CheckTally::default()));
        assert!(report.statistics.values().all(|n| *n == 0));
    }

    #[test]
    fn small_run_passes_every_check() {
        let report = verify_all(&GeneratorConfig::new(5, 300)).unwrap();
        assert!(report.passed(), "{:?}", report.counterexamples);
        assert_eq!(report.tally("invariance").checked, 300);
        assert_eq!(report.tally("ceiling_bound").checked, 300);
        assert!(report.tally("tied_sharpness").checked > 0);
    }

    #[test]
    fn mutations_produce_replayable_counterexamples() {
        let cfg = GeneratorConfig::new(9, 200);
        for (mutation, check) in [
            (Mutation::FlipInvariancePredicate, "invariance"),
            (Mutation::FlipPreserved, "preservation"),
            (Mutation::FlipFavoursAttacker, "adversarial_equivalence"),
        ] {
            let report = verify_all_with(&cfg, mutation).unwrap();
            assert!(!report.passed());
            assert_eq!(report.tally(check).violations, 200, "{mutation:?}");
            let cx = report.counterexamples.iter().find(|c| c.check == check).expect("kept counterexample");
            assert_eq!(cx.seed, 9);
            let replay = crate::generator::generate_instance(&cfg, cx.index);
            let capacities = cx.state.iter().find(|(k, _)| k == "capacities").map(|(_, v)| v.clone()).unwrap();
            assert_eq!(capacities, fractions(replay.pipeline.capacities()));
        }
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let cfg = GeneratorConfig::new(11, 150);
        let parallel = verify_all(&cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let serial = pool.install(|| verify_all(&cfg)).unwrap();
        assert_eq!(parallel, serial);
    }
}
