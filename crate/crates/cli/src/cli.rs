//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use toc_core::adversarial::{defender_misses_bottleneck, ratio_report, PipePair};
use toc_core::ceiling::{ceiling, generalized_ceiling, is_h_admissible, tightness_witness};
use toc_core::characterize::{characterize, check_characterizations};
use toc_core::exact::parse_rational;
use toc_core::falsepos::{decline_check, plateau_check, repaired_useful, simple_useful};
use toc_core::planner::{maxmin_allocation, trivial_allocation, CostModel};
use toc_core::{Rational, Verdict};

use crate::document::{FalsePositiveDocument, PipelineDocument, IDENTITY_SCENARIO};
use crate::generator::GeneratorConfig;
use crate::harness::verify_all;
use crate::report::{self, Rendered, ScenarioCheck};
use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Structured,
}

#[derive(Debug, Parser)]
#[command(name = "toc", version, about = "Exact throughput analysis of serial pipelines")]
struct Args {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Throughput and bottleneck set of a pipeline document.
    Analyze { document: PathBuf },
    /// Classify a named improvement scenario.
    Perturb {
        document: PathBuf,
        #[arg(long, default_value = IDENTITY_SCENARIO)]
        scenario: String,
    },
    /// Ceiling imposed by the document's human stages, with a witness.
    Ceiling {
        document: PathBuf,
        /// Also evaluate this scenario against the ceiling.
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Compare improvements of an attacker and a defender pipeline.
    Compare {
        attacker: PathBuf,
        defender: PathBuf,
        /// Scenario name used on both sides unless overridden.
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long)]
        attacker_scenario: Option<String>,
        #[arg(long)]
        defender_scenario: Option<String>,
    },
    /// Useful-throughput checks for an alert-triage model.
    Fp { document: PathBuf },
    /// Spend an improvement budget.
    Plan {
        document: PathBuf,
        #[arg(long)]
        budget: String,
        /// Cost per unit of factor increase on stages without `--cost`.
        #[arg(long, default_value = "1")]
        unit_cost: String,
        /// Per-stage unit cost, as `stage=value`. Repeatable.
        #[arg(long = "cost", value_name = "STAGE=VALUE")]
        costs: Vec<String>,
        #[arg(long, default_value = "1/1024")]
        tolerance: String,
    },
    /// Randomized verification over generated instances.
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        #[arg(long, default_value_t = 8)]
        max_stages: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs one command line (including the program name) and returns what a
/// process would print and its exit status.
pub fn run_command<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(args) => args,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: 1, stdout: String::new(), stderr: rendered }
            } else {
                Outcome { code: 0, stdout: rendered, stderr: String::new() }
            };
        }
    };
    match dispatch(args.command) {
        Ok((rendered, failed)) => Outcome {
            code: if failed { 2 } else { 0 },
            stdout: match args.format {
                Format::Text => rendered.text,
                Format::Structured => rendered.structured_string(),
            },
            stderr: String::new(),
        },
        Err(e) => Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

fn number(flag: &str, text: &str) -> Result<Rational, CliError> {
    parse_rational(text).map_err(|e| CliError::Usage(format!("--{flag}: {e}")))
}

/// The rendered report and whether it records a failed internal check.
fn dispatch(command: Command) -> Result<(Rendered, bool), CliError> {
    match command {
        Command::Analyze { document } => {
            let doc = PipelineDocument::load(&document)?;
            Ok((report::analyze(&doc.pipeline.name, &doc.pipeline()?), false))
        }
        Command::Perturb { document, scenario } => {
            let doc = PipelineDocument::load(&document)?;
            let p = doc.pipeline()?;
            let a = doc.scenario(&scenario, &p)?;
            let reports = characterize(&p, &a)?;
            let perturbed = p.perturb(&a)?;
            let rendered = report::perturb(&scenario, &p, &a, &reports, &perturbed);
            match check_characterizations(&p, &a, &reports)? {
                Verdict::Pass => Ok((rendered, false)),
                Verdict::Fail(cx) => Err(CliError::Core(toc_core::Error::Inconsistent(cx.to_string()))),
            }
        }
        Command::Ceiling { document, scenario } => {
            let doc = PipelineDocument::load(&document)?;
            let p = doc.pipeline()?;
            let authority = doc
                .authority()?
                .ok_or_else(|| CliError::Schema("ceiling needs an `authority` section naming the human stages".into()))?;
            let bound = ceiling(&p, &authority)?;
            let witness = tightness_witness(&p, &authority)?;
            let reached = p.perturbed_throughput(&witness)?;
            if reached != bound {
                return Err(CliError::Core(toc_core::Error::Inconsistent(format!(
                    "witness reaches {reached}, ceiling is {bound}"
                ))));
            }
            let generalized =
                if authority.has_assist_bounds() { Some(generalized_ceiling(&p, &authority)?) } else { None };
            let check = match &scenario {
                Some(name) => {
                    let a = doc.scenario(name, &p)?;
                    Some(ScenarioCheck {
                        name: name.clone(),
                        h_admissible: is_h_admissible(&a, &authority),
                        throughput: p.perturbed_throughput(&a)?,
                    })
                }
                None => None,
            };
            let violated = check.as_ref().is_some_and(|c| c.h_admissible && c.throughput > bound);
            Ok((report::ceiling(&p, &authority, &bound, &witness, &reached, generalized.as_ref(), check.as_ref()), violated))
        }
        Command::Compare { attacker, defender, scenario, attacker_scenario, defender_scenario } => {
            let (att_doc, def_doc) = (PipelineDocument::load(&attacker)?, PipelineDocument::load(&defender)?);
            let shared = scenario.unwrap_or_else(|| IDENTITY_SCENARIO.to_string());
            let att_name = attacker_scenario.unwrap_or_else(|| shared.clone());
            let def_name = defender_scenario.unwrap_or(shared);
            let pair = PipePair::new(att_doc.pipeline()?, def_doc.pipeline()?);
            let att = att_doc.scenario(&att_name, &pair.attacker)?;
            let def = def_doc.scenario(&def_name, &pair.defender)?;
            let r = ratio_report(&pair, &att, &def)?;
            let missed = defender_misses_bottleneck(&pair, &att, &def)?;
            Ok((report::compare(&att_name, &def_name, &r, missed), false))
        }
        Command::Fp { document } => {
            let doc = FalsePositiveDocument::load(&document)?;
            let model = doc.model()?;
            let samples = doc.samples()?;
            let simple = samples.iter().map(|s| simple_useful(s, &model)).collect::<Result<Vec<_>, _>>()?;
            let plateau = plateau_check(&model, &samples)?;
            let capacity = model.investigation_capacity();
            let precision = doc.precision()?;
            let repaired = match &precision {
                Some(p) => {
                    if !matches!(p.family(), toc_core::falsepos::Family::Constant(_)) {
                        p.validate_strictly_decreasing(capacity)?;
                    }
                    let values =
                        samples.iter().map(|s| repaired_useful(s, p, capacity)).collect::<Result<Vec<_>, _>>()?;
                    Some((values, decline_check(p, capacity, &samples)?))
                }
                None => None,
            };
            let failed = !plateau.holds || repaired.as_ref().is_some_and(|(_, v)| !v.holds());
            let rendered = report::false_positive(
                doc.label.as_deref(),
                &samples,
                &simple,
                &plateau,
                repaired.as_ref().map(|(v, d)| (v.as_slice(), d)),
            );
            Ok((rendered, failed))
        }
        Command::Plan { document, budget, unit_cost, costs, tolerance } => {
            let doc = PipelineDocument::load(&document)?;
            let p = doc.pipeline()?;
            let budget = number("budget", &budget)?;
            let default_cost = number("unit-cost", &unit_cost)?;
            let tolerance = number("tolerance", &tolerance)?;
            let mut per_stage: Vec<(String, Rational)> =
                p.stages().iter().map(|s| (s.to_string(), default_cost.clone())).collect();
            for entry in &costs {
                let (stage, value) = entry
                    .split_once('=')
                    .ok_or_else(|| CliError::Usage(format!("--cost `{entry}`: expected STAGE=VALUE")))?;
                let value = number("cost", value)?;
                match per_stage.iter_mut().find(|(s, _)| s == stage) {
                    Some(slot) => slot.1 = value,
                    None => per_stage.push((stage.to_string(), value)),
                }
            }
            let model = CostModel::new(per_stage, budget.clone())?;
            let trivial = trivial_allocation(&p, &model);
            let maxmin = maxmin_allocation(&p, &model, &tolerance)?;
            Ok((report::plan(&p.throughput(), &budget, &trivial, &maxmin), false))
        }
        Command::Verify { seed, count, max_stages } => {
            let cfg = GeneratorConfig::new(seed, count).with_max_stages(max_stages);
            let r = verify_all(&cfg)?;
            Ok((report::verify(&r), !r.passed()))
        }
    }
}
