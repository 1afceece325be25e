//! Deciding whether a property follows from a logical specification.
//!
//! A goal `f1 & ... & fn => Q` is proved by showing that its negation has no
//! model: the premises (asserted at time zero, or at every time point) together
//! with `~Q` are handed to the tableau. An open tableau yields a lasso-shaped
//! counterexample, which is re-checked by the trace oracle before it is
//! reported.

mod tableau;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::formula::{Formula, Prop};
use crate::oracle::{confirm_counterexample, holds_on_trace, Trace};
use crate::specgen::LogicalSpecification;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProverError {
    #[error("the prover accepts next-free formulas only")]
    ContainsNext,
    #[error("counterexample {0} was rejected by the trace oracle")]
    UnconfirmedTrace(String),
    #[error("cannot start worker threads: {0}")]
    Threads(String),
}

/// How premises are asserted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PremiseMode {
    /// Premises hold at time zero.
    Local,
    /// Premises hold at every time point.
    #[default]
    Global,
}

impl fmt::Display for PremiseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PremiseMode::Local => "local",
            PremiseMode::Global => "global",
        })
    }
}

impl FromStr for PremiseMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "local" => Ok(PremiseMode::Local),
            "global" => Ok(PremiseMode::Global),
            other => Err(format!("unknown premise mode `{other}` (expected local or global)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationGoal {
    pub premises: LogicalSpecification,
    pub property: Formula,
    pub mode: PremiseMode,
}

/// The formula set whose unsatisfiability proves the goal.
pub fn build_goal(g: &VerificationGoal) -> Vec<Formula> {
    let mut out: Vec<Formula> = g
        .premises
        .formulas()
        .map(|f| match g.mode {
            PremiseMode::Local => f.clone(),
            PremiseMode::Global => Formula::always(f.clone()),
        })
        .collect();
    out.push(Formula::not(g.property.clone()));
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProverConfig {
    pub max_states: usize,
    pub budget: Duration,
    /// Worker threads for state expansion; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Try the cone of influence before the full premise set.
    pub cone: bool,
}

impl Default for ProverConfig {
    fn default() -> Self {
        ProverConfig {
            max_states: 2_000_000,
            budget: Duration::from_secs(120),
            threads: None,
            cone: true,
        }
    }
}

fn millis<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(d.as_millis() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ProverStats {
    pub states: usize,
    pub eliminated: usize,
    #[serde(rename = "millis", serialize_with = "millis")]
    pub elapsed: Duration,
}

impl ProverStats {
    fn add(&mut self, other: ProverStats) {
        self.states += other.states;
        self.eliminated += other.eliminated;
        self.elapsed += other.elapsed;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Satisfiability {
    Sat(Trace),
    Unsat,
    ResourceLimit,
}

fn with_threads<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T, ProverError> {
    match threads {
        None => Ok(job()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(job))
            .map_err(|e| ProverError::Threads(e.to_string())),
    }
}

/// Decides whether all of `fs` can hold together at position 0.
///
/// A satisfying trace is checked against every formula with the oracle; a
/// trace that fails the check is an error, never an answer.
pub fn decide_satisfiable(fs: &[Formula], cfg: &ProverConfig) -> Result<(Satisfiability, ProverStats), ProverError> {
    if fs.iter().any(Formula::contains_next) {
        return Err(ProverError::ContainsNext);
    }
    let start = Instant::now();
    let limits = tableau::Limits {
        max_states: cfg.max_states,
        deadline: start + cfg.budget,
    };
    let run = with_threads(cfg.threads, || tableau::run(fs, &limits))?;
    let stats = ProverStats {
        states: run.states,
        eliminated: run.eliminated,
        elapsed: start.elapsed(),
    };
    let result = match run.outcome {
        tableau::Outcome::Sat(trace) => {
            if !fs.iter().all(|f| holds_on_trace(&trace, f, 0)) {
                return Err(ProverError::UnconfirmedTrace(trace.to_string()));
            }
            Satisfiability::Sat(trace)
        }
        tableau::Outcome::Unsat => Satisfiability::Unsat,
        tableau::Outcome::ResourceLimit => Satisfiability::ResourceLimit,
    };
    Ok((result, stats))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Proved,
    Refuted,
    ResourceLimit,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub result: Verdict,
    /// Present exactly when the result is `Refuted`.
    pub counterexample: Option<Trace>,
    pub stats: ProverStats,
    pub mode: PremiseMode,
    /// The answer came from the cone of influence alone.
    pub cone_used: bool,
}

/// Premises connected to the property through shared propositions,
/// transitively. Order is preserved.
pub fn cone_of_influence(premises: &LogicalSpecification, property: &Formula) -> LogicalSpecification {
    let subjects = |f: &Formula| -> BTreeSet<String> {
        f.props()
            .iter()
            .map(|p: &Prop| p.subject().name().to_string())
            .collect()
    };
    let mut reached = subjects(property);
    let mut taken = vec![false; premises.len()];
    loop {
        let mut grew = false;
        for (i, e) in premises.entries().iter().enumerate() {
            if taken[i] {
                continue;
            }
            let atoms = subjects(&e.formula);
            if !atoms.is_disjoint(&reached) {
                taken[i] = true;
                reached.extend(atoms);
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    let mut cone = LogicalSpecification::new();
    for (e, _) in premises.entries().iter().zip(&taken).filter(|(_, &t)| t) {
        cone.push(e.formula.clone(), e.provenance.clone());
    }
    cone
}

fn run_goal(goal: &VerificationGoal, cfg: &ProverConfig) -> Result<(Verdict, Option<Trace>, ProverStats), ProverError> {
    let (sat, stats) = decide_satisfiable(&build_goal(goal), cfg)?;
    Ok(match sat {
        Satisfiability::Unsat => (Verdict::Proved, None, stats),
        Satisfiability::ResourceLimit => (Verdict::ResourceLimit, None, stats),
        Satisfiability::Sat(trace) => {
            if !confirm_counterexample(&trace, goal) {
                return Err(ProverError::UnconfirmedTrace(trace.to_string()));
            }
            (Verdict::Refuted, Some(trace), stats)
        }
    })
}

/// Proves or refutes `goal`. With the cone enabled, a proof on the cone is
/// final; any other cone answer is discarded and the full premise set is
/// used.
pub fn prove_property(goal: &VerificationGoal, cfg: &ProverConfig) -> Result<VerificationReport, ProverError> {
    let mut total = ProverStats::default();
    if cfg.cone {
        let cone = cone_of_influence(&goal.premises, &goal.property);
        if cone.len() < goal.premises.len() {
            let narrowed = VerificationGoal {
                premises: cone,
                ..goal.clone()
            };
            let (verdict, _, stats) = run_goal(&narrowed, cfg)?;
            total.add(stats);
            if verdict == Verdict::Proved {
                return Ok(VerificationReport {
                    result: verdict,
                    counterexample: None,
                    stats: total,
                    mode: goal.mode,
                    cone_used: true,
                });
            }
        }
    }
    let (result, counterexample, stats) = run_goal(goal, cfg)?;
    total.add(stats);
    Ok(VerificationReport {
        result,
        counterexample,
        stats: total,
        mode: goal.mode,
        cone_used: false,
    })
}
