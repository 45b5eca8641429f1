use std::path::PathBuf;

use proptest::prelude::*;
use serde_json::Value;
use toc_cli::cli::{run_command, Outcome};
use toc_cli::document::PipelineDocument;
use toc_core::{Pipeline, Rational, RationalPipeline, Scalar};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Outcome {
    run_command(std::iter::once("toc").chain(args.iter().copied()))
}

fn structured(args: &[&str]) -> Value {
    let mut full = vec!["--format", "structured"];
    full.extend_from_slice(args);
    let out = run(&full);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    serde_json::from_str(&out.stdout).expect("valid JSON")
}

fn scratch(name: &str, contents: &str) -> String {
    let dir = std::env::temp_dir().join(format!("toc-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn analyze_worked_example() {
    let out = run(&["analyze", &data("three_stage.json")]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("throughput: 1\n"));
    assert!(out.stdout.contains("bottlenecks: {b}\n"));
    let json = structured(&["analyze", &data("three_stage.json")]);
    assert_eq!(json["throughput"], "1/1");
    assert_eq!(json["non_bottlenecks"], serde_json::json!(["a", "c"]));
}

#[test]
fn perturb_scenarios() {
    let doc = data("three_stage.json");
    let identity = structured(&["perturb", &doc]);
    assert_eq!(identity["classification"]["outcome"], "unchanged");
    assert_eq!(identity["classification"]["witness"], "b");

    let moved = structured(&["perturb", &doc, "--scenario", "b_five"]);
    assert_eq!(moved["perturbed_throughput"], "3/1");
    assert_eq!(moved["migration"]["departed"], serde_json::json!(["b"]));
    assert_eq!(moved["migration"]["entered"], serde_json::json!(["a"]));
    assert_eq!(moved["preservation"]["preserved"], false);

    let kept = structured(&["perturb", &doc, "--scenario", "double_b"]);
    assert_eq!(kept["perturbed_throughput"], "2/1");
    assert_eq!(kept["preservation"]["preserved"], true);
}

#[test]
fn ceiling_reports_witness_and_generalized_bound() {
    let json = structured(&["ceiling", &data("three_stage.json"), "--scenario", "skip_b"]);
    assert_eq!(json["ceiling"], "1/1");
    assert_eq!(json["witness_throughput"], "1/1");
    assert_eq!(json["witness"]["b"], "1/1");
    assert_eq!(json["generalized_ceiling"], "2/1");
    assert_eq!(json["scenario"]["h_admissible"], true);
}

#[test]
fn ceiling_without_authority_is_a_schema_error() {
    let doc = scratch(
        "no_authority.json",
        r#"{"format_version":"1","pipeline":{"name":"x","stages":[{"id":"a","capacity":"2"}]}}"#,
    );
    let out = run(&["ceiling", &doc]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("authority"));
}

#[test]
fn compare_pair() {
    let json = structured(&[
        "compare",
        &data("three_stage.json"),
        &data("defender.json"),
        "--attacker-scenario",
        "double_b",
        "--defender-scenario",
        "faster_enrichment",
    ]);
    assert_eq!(json["baseline_ratio"], "2/5");
    assert_eq!(json["perturbed_ratio"], "4/5");
    assert_eq!(json["favours_attacker"], true);
    assert_eq!(json["defender_missed_bottleneck"], true);
}

#[test]
fn false_positive_report() {
    let json = structured(&["fp", &data("triage_fp.json")]);
    assert_eq!(json["fixed_fraction"]["plateau_value"], "10/1");
    assert_eq!(json["fixed_fraction"]["plateau_holds"], true);
    assert_eq!(json["precision"]["holds"], true);
    assert_eq!(json["precision"]["useful"][0], "80/3");
}

#[test]
fn exponential_precision_reports_enclosures() {
    let doc = scratch(
        "exp.json",
        r#"{"format_version":"1","false_positive_fraction":"1/2","investigation_capacity":"10",
            "precision":{"family":"exponential_decay","rate":"1/20"},"samples":["11","15","30"]}"#,
    );
    let json = structured(&["fp", &doc]);
    assert_eq!(json["precision"]["holds"], true);
    assert!(json["precision"]["useful"][0]["lower"].is_string());
}

#[test]
fn plan_matches_known_optimum() {
    let json = structured(&["plan", &data("three_stage.json"), "--budget", "100", "--tolerance", "1/1000000"]);
    assert_eq!(json["maxmin"]["throughput"], "1236/19");
    assert_eq!(json["trivial"]["throughput"], "3/1");

    let weighted = structured(&["plan", &data("three_stage.json"), "--budget", "2", "--cost", "b=2"]);
    assert_eq!(weighted["maxmin"]["factors"]["b"], "2/1");
    assert_eq!(weighted["maxmin"]["spent"], "2/1");
}

#[test]
fn plan_rejects_bad_flags() {
    let doc = data("three_stage.json");
    assert_eq!(run(&["plan", &doc, "--budget", "-1"]).code, 1);
    assert_eq!(run(&["plan", &doc, "--budget", "1e3"]).code, 1);
    assert_eq!(run(&["plan", &doc, "--budget", "1", "--cost", "b"]).code, 1);
    let unknown = run(&["plan", &doc, "--budget", "1", "--cost", "zz=1"]);
    assert_eq!(unknown.code, 1);
    assert!(unknown.stderr.contains("zz"));
}

#[test]
fn verify_small_run_passes_and_replays() {
    let a = run(&["--format", "structured", "verify", "--seed", "3", "--count", "200", "--max-stages", "5"]);
    assert_eq!(a.code, 0);
    let json: Value = serde_json::from_str(&a.stdout).unwrap();
    assert_eq!(json["passed"], true);
    assert_eq!(json["max_stages"], 5);
    assert_eq!(a, run(&["--format", "structured", "verify", "--seed", "3", "--count", "200", "--max-stages", "5"]));
    let empty = structured(&["verify", "--count", "0"]);
    assert_eq!(empty["total_violations"], 0);
}

#[test]
fn errors_map_to_exit_code_one() {
    let unknown = run(&["frobnicate"]);
    assert_eq!(unknown.code, 1);
    assert!(unknown.stderr.contains("frobnicate"));

    let missing = run(&["analyze", "/nonexistent/pipeline.json"]);
    assert_eq!(missing.code, 1);
    assert!(missing.stderr.contains("/nonexistent/pipeline.json"));

    let scenario = run(&["perturb", &data("three_stage.json"), "--scenario", "nope"]);
    assert_eq!(scenario.code, 1);
    assert!(scenario.stderr.contains("nope"));

    let invalid = scratch(
        "invalid.json",
        r#"{"format_version":"1","pipeline":{"name":"x","stages":[{"id":"a","capacity":"0"},{"id":"b","capacity":"-2"}]}}"#,
    );
    let out = run(&["analyze", &invalid]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("Assumption 2"), "{}", out.stderr);
    assert!(out.stderr.contains("`a`") && out.stderr.contains("`b`"), "{}", out.stderr);

    let empty = scratch("empty.json", r#"{"format_version":"1","pipeline":{"name":"x","stages":[]}}"#);
    let out = run(&["analyze", &empty]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("Assumption 1"), "{}", out.stderr);
}

#[test]
fn help_goes_to_stdout_with_success() {
    let out = run(&["--help"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("verify"));
}

fn capacity() -> impl Strategy<Value = Rational> {
    prop_oneof![
        (1i64..1_000_000).prop_map(Rational::from_int),
        (1i64..i64::MAX, 1i64..i64::MAX).prop_map(|(n, d)| Rational::from_ratio(n, d)),
    ]
}

proptest! {
    #[test]
    fn documents_round_trip(caps in prop::collection::vec(capacity(), 1..10)) {
        let p: RationalPipeline =
            Pipeline::new(caps.into_iter().enumerate().map(|(i, c)| (format!("v{i}"), c))).unwrap();
        let doc = PipelineDocument::from_pipeline("rt", &p);
        let reparsed = PipelineDocument::parse(&doc.to_json()).unwrap();
        prop_assert_eq!(&reparsed, &doc);
        prop_assert_eq!(reparsed.pipeline().unwrap(), p);
    }
}
