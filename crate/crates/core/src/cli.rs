//! Command-line front end: `generate`, `verify` and `oracle`.
//!
//! Exit codes: 0 success (spec written, property proved, model found),
//! 1 negative answer (property refuted, no model within bounds), 2 usage,
//! input or internal error, 3 resource budget exhausted.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::diag::Diagnostic;
use crate::formula::{parse_formula, print_formula, Formula, Prop};
use crate::oracle::{default_bounds, search_model, OracleError, SearchBounds, SearchOutcome, TraceJson};
use crate::pattern::{parse_pattern_set, validate_pattern_set, PatternSet};
use crate::prover::{build_goal, prove_property, PremiseMode, ProverConfig, ProverStats, Verdict, VerificationGoal};
use crate::specgen::{generate_for_model, parse_spec_file, sum_specs, write_spec_file, LogicalSpecification};
use crate::workflow::{parse_model_file, validate_model, ModelFile};

pub const PATTERNS_ENV: &str = "WFSPEC_PATTERNS";

#[derive(Debug, Parser)]
#[command(
    name = "wfspec",
    version,
    about = "Workflow-pattern specifications and temporal property checking"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the logical specification of a model.
    Generate(GenerateArgs),
    /// Prove or refute a property against a specification.
    Verify(VerifyArgs),
    /// Search bounded lasso traces for a model of the goal set.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct PatternArgs {
    /// Pattern file; falls back to $WFSPEC_PATTERNS, then the built-in patterns.
    #[arg(long, env = PATTERNS_ENV)]
    pub patterns: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub patterns: PatternArgs,
    /// Workflow model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Output spec file; stdout when omitted.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GoalArgs {
    #[command(flatten)]
    pub patterns: PatternArgs,
    /// Model file: source of premises when --spec is absent, and of display names.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Spec file with the premises.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Property formula.
    #[arg(long, conflicts_with = "property_file")]
    pub property: Option<String>,
    /// File holding exactly one property formula.
    #[arg(long)]
    pub property_file: Option<PathBuf>,
    /// Premises hold at time zero (local) or at all times (global).
    #[arg(long, default_value = "global")]
    pub mode: PremiseMode,
    /// Time budget in milliseconds.
    #[arg(long)]
    pub budget_ms: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub goal: GoalArgs,
    /// Skip the cone-of-influence attempt.
    #[arg(long)]
    pub no_cone: bool,
    /// Tableau state budget.
    #[arg(long)]
    pub max_states: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub goal: GoalArgs,
    #[arg(long)]
    pub max_prefix: Option<usize>,
    #[arg(long)]
    pub max_loop: Option<usize>,
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Generate(a) => run_generate(&a),
        Command::Verify(a) => run_verify(&a),
        Command::Oracle(a) => run_oracle(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn report_diagnostics(diags: &[Diagnostic], source: &str) -> Result<()> {
    for d in diags {
        eprintln!("{source}: {d}");
    }
    if diags.iter().any(Diagnostic::is_error) {
        bail!("{source} has errors");
    }
    Ok(())
}

pub fn load_patterns(args: &PatternArgs) -> Result<PatternSet> {
    let Some(path) = &args.patterns else {
        return Ok(PatternSet::standard());
    };
    let set = parse_pattern_set(&read(path)?).with_context(|| path.display().to_string())?;
    report_diagnostics(&validate_pattern_set(&set), &path.display().to_string())?;
    Ok(set)
}

fn load_model(path: &Path, set: &PatternSet) -> Result<ModelFile> {
    let model = parse_model_file(&read(path)?, set).with_context(|| path.display().to_string())?;
    report_diagnostics(&validate_model(&model, set), &path.display().to_string())?;
    Ok(model)
}

fn model_spec(model: &ModelFile, set: &PatternSet) -> Result<Vec<(String, LogicalSpecification)>> {
    Ok(generate_for_model(model, set)?)
}

fn run_generate(args: &GenerateArgs) -> Result<i32> {
    let set = load_patterns(&args.patterns)?;
    let model = load_model(&args.model, &set)?;
    let specs = model_spec(&model, &set)?;
    let total = sum_specs(specs.iter().map(|(_, s)| s));
    let text = write_spec_file(&total);
    match &args.spec {
        Some(path) => fs::write(path, &text).with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{text}"),
    }
    for (label, spec) in &specs {
        eprintln!("{label}: {} formulas", spec.len());
    }
    eprintln!("total: {} formulas", total.len());
    Ok(0)
}

struct Loaded {
    premises: LogicalSpecification,
    property: Option<Formula>,
    model: Option<ModelFile>,
}

fn load_goal(args: &GoalArgs, property_required: bool) -> Result<Loaded> {
    let set = load_patterns(&args.patterns)?;
    let model = args.model.as_deref().map(|p| load_model(p, &set)).transpose()?;
    let premises = match (&args.spec, &model) {
        (Some(path), _) => parse_spec_file(&read(path)?).with_context(|| path.display().to_string())?,
        (None, Some(model)) => sum_specs(model_spec(model, &set)?.iter().map(|(_, s)| s)),
        (None, None) => bail!("either --spec or --model is required"),
    };
    let property = match (&args.property, &args.property_file) {
        (Some(text), _) => Some(parse_formula(text).context("property")?),
        (None, Some(path)) => {
            let text = read(path)?;
            let lines: Vec<&str> = text
                .lines()
                .map(|l| l.split('#').next().unwrap_or("").trim())
                .filter(|l| !l.is_empty())
                .collect();
            if lines.len() != 1 {
                bail!(
                    "{} must contain exactly one property, found {}",
                    path.display(),
                    lines.len()
                );
            }
            Some(parse_formula(lines[0]).with_context(|| path.display().to_string())?)
        }
        (None, None) if property_required => bail!("a property is required (--property or --property-file)"),
        (None, None) => None,
    };
    if property.as_ref().is_some_and(Formula::contains_next) {
        bail!("properties must not use the next operator");
    }
    Ok(Loaded {
        premises,
        property,
        model,
    })
}

fn renderer(model: &Option<ModelFile>) -> impl Fn(&Prop) -> String + '_ {
    move |p: &Prop| {
        let name = match model {
            Some(m) => m.display_name(p.subject()).to_string(),
            None => p.subject().name().to_string(),
        };
        match p {
            Prop::Atom(_) => name,
            Prop::Cond(_) => format!("c({name})"),
        }
    }
}

fn emit(report: &impl Serialize, path: &Option<PathBuf>) -> Result<()> {
    let json = serde_json::to_string_pretty(report)? + "\n";
    match path {
        Some(path) => fs::write(path, json).with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{json}"),
    }
    Ok(())
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifyReport {
    pub result: Verdict,
    pub mode: PremiseMode,
    pub cone_used: bool,
    pub property: String,
    pub premises_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<TraceJson>,
    pub stats: ProverStats,
}

fn run_verify(args: &VerifyArgs) -> Result<i32> {
    let loaded = load_goal(&args.goal, true)?;
    let property = loaded.property.expect("property is required");
    let mut cfg = ProverConfig {
        threads: args.goal.threads,
        cone: !args.no_cone,
        ..ProverConfig::default()
    };
    if let Some(ms) = args.goal.budget_ms {
        cfg.budget = Duration::from_millis(ms);
    }
    if let Some(n) = args.max_states {
        cfg.max_states = n;
    }
    let goal = VerificationGoal {
        premises: loaded.premises,
        property,
        mode: args.goal.mode,
    };
    let outcome = prove_property(&goal, &cfg)?;
    let report = VerifyReport {
        result: outcome.result,
        mode: outcome.mode,
        cone_used: outcome.cone_used,
        property: print_formula(&goal.property)?,
        premises_count: goal.premises.len(),
        counterexample: outcome
            .counterexample
            .as_ref()
            .map(|t| t.to_json(renderer(&loaded.model))),
        stats: outcome.stats,
    };
    emit(&report, &args.goal.report)?;
    Ok(match outcome.result {
        Verdict::Proved => 0,
        Verdict::Refuted => 1,
        Verdict::ResourceLimit => 3,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OracleResult {
    ModelFound,
    NoneUpToBound,
    ResourceLimit,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleReport {
    pub result: OracleResult,
    pub mode: PremiseMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub property: Option<String>,
    pub premises_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceJson>,
    pub bounds_used: SearchBounds,
    pub millis: u64,
}

fn run_oracle(args: &OracleArgs) -> Result<i32> {
    let loaded = load_goal(&args.goal, false)?;
    let mode = args.goal.mode;
    let fs = match &loaded.property {
        Some(property) => build_goal(&VerificationGoal {
            premises: loaded.premises.clone(),
            property: property.clone(),
            mode,
        }),
        None => loaded
            .premises
            .formulas()
            .map(|f| match mode {
                PremiseMode::Local => f.clone(),
                PremiseMode::Global => Formula::always(f.clone()),
            })
            .collect(),
    };
    let defaults = default_bounds(&fs);
    let bounds = SearchBounds {
        max_prefix: args.max_prefix.unwrap_or(defaults.max_prefix),
        max_loop: args.max_loop.unwrap_or(defaults.max_loop),
    };
    let atoms = fs.iter().flat_map(Formula::props).collect();
    let budget = args.goal.budget_ms.map(Duration::from_millis);
    let start = Instant::now();
    let search = || search_model(&fs, &atoms, bounds, budget);
    let outcome = match args.goal.threads {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(search),
        None => search(),
    };
    let (result, trace) = match outcome {
        Ok(SearchOutcome::Found(t)) => (OracleResult::ModelFound, Some(t.to_json(renderer(&loaded.model)))),
        Ok(SearchOutcome::NoneUpToBound(_)) => (OracleResult::NoneUpToBound, None),
        Err(OracleError::ResourceLimit(_)) => (OracleResult::ResourceLimit, None),
        Err(e) => return Err(e.into()),
    };
    let report = OracleReport {
        result,
        mode,
        property: loaded.property.as_ref().map(print_formula).transpose()?,
        premises_count: loaded.premises.len(),
        trace,
        bounds_used: bounds,
        millis: start.elapsed().as_millis() as u64,
    };
    emit(&report, &args.goal.report)?;
    Ok(match result {
        OracleResult::ModelFound => 0,
        OracleResult::NoneUpToBound => 1,
        OracleResult::ResourceLimit => 3,
    })
}
