//! Report rendering.
//!
//! Every command produces a [`Rendered`] pair: text for people and a JSON
//! value for machines. In the JSON form every rational is a `"num/den"`
//! string, integers included, so consumers never need to guess.

use std::fmt::Write as _;

use serde_json::{json, Map, Value as Json};
use toc_core::adversarial::RatioReport;
use toc_core::characterize::{CharacterizationReports, Outcome};
use toc_core::exact::fraction_string;
use toc_core::falsepos::{DeclineVerdict, PlateauVerdict, Value};
use toc_core::{
    Error, Rational, RationalAllocation, RationalAuthority, RationalMultiplier, RationalPipeline, StageId,
};

use crate::harness::HarnessReport;

#[derive(Clone, Debug, PartialEq)]
pub struct Rendered {
    pub text: String,
    pub structured: Json,
}

impl Rendered {
    pub fn structured_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.structured).expect("JSON values always serialize");
        s.push('\n');
        s
    }
}

/// `"num/den"` in lowest terms, with an explicit denominator for integers.
pub fn num_den(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

fn ids(stages: &[StageId]) -> Json {
    Json::Array(stages.iter().map(|s| Json::String(s.to_string())).collect())
}

fn id_list(stages: &[StageId]) -> String {
    let names: Vec<&str> = stages.iter().map(StageId::as_str).collect();
    format!("{{{}}}", names.join(", "))
}

fn stage_map<'a>(entries: impl IntoIterator<Item = (&'a StageId, &'a Rational)>) -> Json {
    let map: Map<String, Json> = entries.into_iter().map(|(s, q)| (s.to_string(), Json::String(num_den(q)))).collect();
    Json::Object(map)
}

fn stage_list<'a>(entries: impl IntoIterator<Item = (&'a StageId, &'a Rational)>) -> String {
    let parts: Vec<String> = entries.into_iter().map(|(s, q)| format!("{s}={}", fraction_string(q))).collect();
    parts.join(", ")
}

fn value_json(v: &Value<Rational>) -> Json {
    match v {
        Value::Exact(q) => Json::String(num_den(q)),
        Value::Enclosed { lower, upper } => json!({ "lower": num_den(lower), "upper": num_den(upper) }),
    }
}

fn value_text(v: &Value<Rational>) -> String {
    match v {
        Value::Exact(q) => fraction_string(q),
        Value::Enclosed { lower, upper } => format!("[{}, {}]", fraction_string(lower), fraction_string(upper)),
    }
}

pub fn analyze(name: &str, p: &RationalPipeline) -> Rendered {
    let report = p.bottleneck_report();
    let mut text = String::new();
    writeln!(text, "pipeline: {name}").unwrap();
    writeln!(text, "capacities: {}", stage_list(p.iter())).unwrap();
    writeln!(text, "throughput: {}", fraction_string(&report.throughput)).unwrap();
    writeln!(text, "bottlenecks: {}", id_list(&report.bottlenecks)).unwrap();
    writeln!(text, "non-bottlenecks: {}", id_list(&report.non_bottlenecks)).unwrap();
    Rendered {
        text,
        structured: json!({
            "command": "analyze",
            "pipeline": name,
            "capacities": stage_map(p.iter()),
            "stage_order": ids(p.stages()),
            "throughput": num_den(&report.throughput),
            "bottlenecks": ids(&report.bottlenecks),
            "non_bottlenecks": ids(&report.non_bottlenecks),
        }),
    }
}

pub fn perturb(
    scenario: &str,
    p: &RationalPipeline,
    a: &RationalMultiplier,
    reports: &CharacterizationReports<Rational>,
    perturbed: &RationalPipeline,
) -> Rendered {
    let c = &reports.classification;
    let pr = &reports.preservation;
    let m = &reports.migration;
    let outcome = match c.outcome {
        Outcome::Unchanged => "unchanged",
        Outcome::StrictIncrease => "strict_increase",
    };
    let before = p.throughput();
    let after = perturbed.throughput();
    let mut text = String::new();
    writeln!(text, "scenario: {scenario}").unwrap();
    writeln!(text, "factors: {}", stage_list(p.stages().iter().map(|s| (s, a.factor(s.as_str()).expect("aligned"))))).unwrap();
    writeln!(text, "throughput: {} -> {}", fraction_string(&before), fraction_string(&after)).unwrap();
    writeln!(text, "outcome: {outcome}").unwrap();
    if let Some(w) = &c.witness {
        writeln!(text, "witness: {w} (bottleneck left at factor 1)").unwrap();
    }
    writeln!(text, "bottlenecks: {} -> {}", id_list(&p.bottlenecks()), id_list(&perturbed.bottlenecks())).unwrap();
    writeln!(text, "bottleneck set preserved: {}", pr.preserved).unwrap();
    writeln!(text, "  equal factors on bottlenecks: {}", pr.equal_bottleneck_factors).unwrap();
    writeln!(text, "  bottlenecks stay below the rest: {}", pr.bottlenecks_stay_below_rest).unwrap();
    writeln!(text, "migration: {}", reports.migration_occurred).unwrap();
    if !m.is_empty() {
        writeln!(text, "  departed: {}", id_list(&m.departed)).unwrap();
        writeln!(text, "  entered: {}", id_list(&m.entered)).unwrap();
    }
    Rendered {
        text,
        structured: json!({
            "command": "perturb",
            "scenario": scenario,
            "factors": stage_map(a.iter()),
            "throughput": num_den(&before),
            "perturbed_throughput": num_den(&after),
            "perturbed_capacities": stage_map(perturbed.iter()),
            "classification": {
                "outcome": outcome,
                "some_bottleneck_unimproved": c.some_bottleneck_unimproved,
                "all_bottlenecks_improved": c.all_bottlenecks_improved,
                "witness": c.witness.as_ref().map(StageId::to_string),
            },
            "bottlenecks": ids(&p.bottlenecks()),
            "perturbed_bottlenecks": ids(&perturbed.bottlenecks()),
            "preservation": {
                "preserved": pr.preserved,
                "equal_bottleneck_factors": pr.equal_bottleneck_factors,
                "bottlenecks_stay_below_rest": pr.bottlenecks_stay_below_rest,
                "common_factor": pr.common_factor.as_ref().map(num_den),
            },
            "migration": {
                "occurred": reports.migration_occurred,
                "departed": ids(&m.departed),
                "entered": ids(&m.entered),
            },
        }),
    }
}

/// Scenario throughput shown next to the ceiling, with whether the scenario
/// respects the authority set.
pub struct ScenarioCheck {
    pub name: String,
    pub h_admissible: bool,
    pub throughput: Rational,
}

pub fn ceiling(
    p: &RationalPipeline,
    authority: &RationalAuthority,
    bound: &Rational,
    witness: &RationalMultiplier,
    witness_throughput: &Rational,
    generalized: Option<&Rational>,
    scenario: Option<&ScenarioCheck>,
) -> Rendered {
    let human: Vec<StageId> = authority.human_stages().cloned().collect();
    let mut text = String::new();
    writeln!(text, "human stages: {}", id_list(&human)).unwrap();
    writeln!(text, "ceiling: {}", fraction_string(bound)).unwrap();
    writeln!(text, "witness factors: {}", stage_list(p.stages().iter().map(|s| (s, witness.factor(s.as_str()).expect("aligned"))))).unwrap();
    writeln!(text, "witness throughput: {}", fraction_string(witness_throughput)).unwrap();
    if let Some(g) = generalized {
        writeln!(text, "generalized ceiling (assisted human stages): {}", fraction_string(g)).unwrap();
    }
    if let Some(s) = scenario {
        writeln!(
            text,
            "scenario {}: throughput {}, respects human stages: {}",
            s.name,
            fraction_string(&s.throughput),
            s.h_admissible
        )
        .unwrap();
    }
    Rendered {
        text,
        structured: json!({
            "command": "ceiling",
            "human": ids(&human),
            "ceiling": num_den(bound),
            "witness": stage_map(witness.iter()),
            "witness_throughput": num_den(witness_throughput),
            "generalized_ceiling": generalized.map(num_den),
            "scenario": scenario.map(|s| json!({
                "name": s.name,
                "h_admissible": s.h_admissible,
                "throughput": num_den(&s.throughput),
            })),
        }),
    }
}

pub fn compare(attacker_scenario: &str, defender_scenario: &str, r: &RatioReport<Rational>, defender_missed: bool) -> Rendered {
    let mut text = String::new();
    writeln!(text, "attacker scenario: {attacker_scenario}").unwrap();
    writeln!(text, "defender scenario: {defender_scenario}").unwrap();
    writeln!(text, "baseline ratio: {}", fraction_string(&r.baseline_ratio)).unwrap();
    writeln!(text, "perturbed ratio: {}", fraction_string(&r.perturbed_ratio)).unwrap();
    writeln!(text, "attacker gain: {}", fraction_string(&r.attacker_gain)).unwrap();
    writeln!(text, "defender gain: {}", fraction_string(&r.defender_gain)).unwrap();
    writeln!(text, "favours attacker: {}", r.favours_attacker).unwrap();
    writeln!(text, "defender left a bottleneck at factor 1: {defender_missed}").unwrap();
    Rendered {
        text,
        structured: json!({
            "command": "compare",
            "attacker_scenario": attacker_scenario,
            "defender_scenario": defender_scenario,
            "baseline_ratio": num_den(&r.baseline_ratio),
            "perturbed_ratio": num_den(&r.perturbed_ratio),
            "attacker_gain": num_den(&r.attacker_gain),
            "defender_gain": num_den(&r.defender_gain),
            "favours_attacker": r.favours_attacker,
            "defender_missed_bottleneck": defender_missed,
        }),
    }
}

pub fn false_positive(
    label: Option<&str>,
    samples: &[Rational],
    simple: &[Rational],
    plateau: &PlateauVerdict<Rational>,
    repaired: Option<(&[Value<Rational>], &DeclineVerdict<Rational>)>,
) -> Rendered {
    let mut text = String::new();
    if let Some(l) = label {
        writeln!(text, "alert stream: {l}").unwrap();
    }
    writeln!(text, "fixed-fraction plateau value: {}", fraction_string(&plateau.common_value)).unwrap();
    writeln!(text, "plateau holds at every sample: {}", plateau.holds).unwrap();
    for (s, u) in samples.iter().zip(simple) {
        writeln!(text, "  rate {}: useful {}", fraction_string(s), fraction_string(u)).unwrap();
    }
    let mut structured = json!({
        "command": "fp",
        "label": label,
        "samples": samples.iter().map(num_den).collect::<Vec<_>>(),
        "fixed_fraction": {
            "useful": simple.iter().map(num_den).collect::<Vec<_>>(),
            "plateau_value": num_den(&plateau.common_value),
            "plateau_holds": plateau.holds,
            "mismatches": plateau.mismatches,
        },
    });
    if let Some((values, verdict)) = repaired {
        let (kind, extra) = match verdict {
            DeclineVerdict::StrictDecline { first_failure, .. } => {
                ("strict_decline", json!({ "first_failure": first_failure }))
            }
            DeclineVerdict::Constant { value, .. } => ("constant", json!({ "value": num_den(value) })),
        };
        writeln!(text, "precision model: {kind}, holds: {}", verdict.holds()).unwrap();
        for (s, v) in samples.iter().zip(values) {
            writeln!(text, "  rate {}: useful {}", fraction_string(s), value_text(v)).unwrap();
        }
        structured["precision"] = json!({
            "check": kind,
            "holds": verdict.holds(),
            "useful": values.iter().map(value_json).collect::<Vec<_>>(),
            "detail": extra,
        });
    }
    Rendered { text, structured }
}

fn allocation_json(a: &RationalAllocation) -> Json {
    json!({
        "factors": stage_map(a.multiplier.iter()),
        "throughput": num_den(&a.achieved_throughput),
        "spent": num_den(&a.spent),
        "unspent": num_den(&a.unspent),
    })
}

fn allocation_text(text: &mut String, title: &str, a: &RationalAllocation) {
    writeln!(text, "{title}:").unwrap();
    writeln!(text, "  throughput: {}", fraction_string(&a.achieved_throughput)).unwrap();
    writeln!(text, "  factors: {}", stage_list(a.multiplier.iter())).unwrap();
    writeln!(text, "  spent: {}, unspent: {}", fraction_string(&a.spent), fraction_string(&a.unspent)).unwrap();
}

pub fn plan(
    before: &Rational,
    budget: &Rational,
    trivial: &Result<RationalAllocation, Error>,
    maxmin: &RationalAllocation,
) -> Rendered {
    let mut text = String::new();
    writeln!(text, "budget: {}", fraction_string(budget)).unwrap();
    writeln!(text, "current throughput: {}", fraction_string(before)).unwrap();
    match trivial {
        Ok(a) => allocation_text(&mut text, "bottleneck-only allocation", a),
        Err(e) => writeln!(text, "bottleneck-only allocation: not applicable ({e})").unwrap(),
    }
    allocation_text(&mut text, "max-min allocation", maxmin);
    Rendered {
        text,
        structured: json!({
            "command": "plan",
            "budget": num_den(budget),
            "throughput": num_den(before),
            "trivial": match trivial {
                Ok(a) => allocation_json(a),
                Err(e) => json!({ "not_applicable": e.to_string() }),
            },
            "maxmin": allocation_json(maxmin),
        }),
    }
}

pub fn verify(r: &HarnessReport) -> Rendered {
    let mut text = String::new();
    writeln!(text, "seed {}, {} instances, up to {} stages", r.seed, r.instance_count, r.max_stages).unwrap();
    writeln!(text, "{:<32}{:>10}{:>12}{:>12}", "check", "checked", "hypothesis", "violations").unwrap();
    for (name, t) in &r.checks {
        writeln!(text, "{name:<32}{:>10}{:>12}{:>12}", t.checked, t.hypothesis_held, t.violations).unwrap();
    }
    for (name, n) in &r.statistics {
        writeln!(text, "{name}: {n}").unwrap();
    }
    for cx in &r.counterexamples {
        writeln!(text, "counterexample {} at seed {} index {}", cx.check, cx.seed, cx.index).unwrap();
        for (k, v) in &cx.state {
            writeln!(text, "  {k}: {v}").unwrap();
        }
    }
    writeln!(text, "{}", if r.passed() { "all checks passed" } else { "VIOLATIONS FOUND" }).unwrap();
    let mut structured = serde_json::to_value(r).expect("report serializes");
    structured["command"] = json!("verify");
    structured["passed"] = json!(r.passed());
    Rendered { text, structured }
}
