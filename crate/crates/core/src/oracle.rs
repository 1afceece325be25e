//! Ground truth on explicit traces.
//!
//! Formulas are evaluated on ultimately periodic traces `prefix . loop^w`
//! with reflexive `<>`/`[]`. Nothing here depends on the prover's tableau; the
//! two are used to check each other.
//!
//! [`search_model`] looks for the first model in a fixed enumeration order:
//! loop length ascending, then prefix length ascending, then the state
//! sequence (prefix followed by loop) lexicographically, where a state is
//! ordered by its bit mask over the sorted proposition list (first proposition
//! is the least significant bit). The search never enumerates loops
//! position by position: on the loop every `<>`/`[]` subformula has one value
//! that depends only on the set of states the loop visits, so loops are
//! enumerated as state sets and prefixes by backward propagation of those
//! values.

use std::cell::{Cell, RefCell};
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::formula::{Atom, Formula, Prop};
use crate::prover::{build_goal, VerificationGoal};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("trace loop must contain at least one state")]
    EmptyLoop,
    #[error("malformed trace: {0}")]
    TraceSyntax(String),
    #[error("search supports at most 63 propositions, got {0}")]
    TooManyProps(usize),
    #[error("the oracle evaluates next-free formulas only")]
    ContainsNext,
    #[error("search bounds must be at least 1")]
    ZeroBound,
    #[error("oracle search exceeded its time budget after {0:?}")]
    ResourceLimit(Duration),
    #[error("internal oracle error: {0}")]
    Internal(String),
}

pub type TraceState = BTreeSet<Prop>;

/// The infinite word `prefix . cycle . cycle . ...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Trace {
    prefix: Vec<TraceState>,
    cycle: Vec<TraceState>,
}

impl Trace {
    pub fn new(prefix: Vec<TraceState>, cycle: Vec<TraceState>) -> Result<Self, OracleError> {
        if cycle.is_empty() {
            return Err(OracleError::EmptyLoop);
        }
        Ok(Trace { prefix, cycle })
    }

    pub fn prefix(&self) -> &[TraceState] {
        &self.prefix
    }

    /// The repeated part.
    pub fn cycle(&self) -> &[TraceState] {
        &self.cycle
    }

    /// Number of distinct positions (prefix plus one copy of the loop).
    pub fn len(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Maps any position onto its representative in `0..len()`.
    pub fn normalize(&self, position: usize) -> usize {
        let p = self.prefix.len();
        if position < self.len() {
            position
        } else {
            p + (position - p) % self.cycle.len()
        }
    }

    pub fn state(&self, position: usize) -> &TraceState {
        let i = self.normalize(position);
        if i < self.prefix.len() {
            &self.prefix[i]
        } else {
            &self.cycle[i - self.prefix.len()]
        }
    }

    /// Renders with a custom proposition formatter, e.g. display names.
    pub fn render_with(&self, name: impl Fn(&Prop) -> String) -> String {
        let states = |list: &[TraceState]| {
            list.iter()
                .map(|s| format!("{{{}}}", s.iter().map(&name).collect::<Vec<_>>().join(",")))
                .collect::<Vec<_>>()
                .join(",")
        };
        format!("prefix: [{}] loop: [{}]", states(&self.prefix), states(&self.cycle))
    }

    /// Structured form used in JSON reports.
    pub fn to_json(&self, name: impl Fn(&Prop) -> String) -> TraceJson {
        let conv = |list: &[TraceState]| list.iter().map(|s| s.iter().map(&name).collect()).collect();
        TraceJson {
            text: self.render_with(&name),
            prefix: conv(&self.prefix),
            r#loop: conv(&self.cycle),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceJson {
    pub text: String,
    pub prefix: Vec<Vec<String>>,
    pub r#loop: Vec<Vec<String>>,
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_with(ToString::to_string))
    }
}

fn parse_state_list(text: &str) -> Result<Vec<TraceState>, OracleError> {
    let bad = |m: &str| OracleError::TraceSyntax(m.to_string());
    let inner = text
        .trim()
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| bad("state list must be enclosed in `[...]`"))?;
    let mut states = Vec::new();
    let mut rest = inner.trim();
    while !rest.is_empty() {
        let body_end = rest.find('}').ok_or_else(|| bad("unclosed `{`"))?;
        let body = rest.strip_prefix('{').ok_or_else(|| bad("state must start with `{`"))?;
        let body = &body[..body_end - 1];
        let mut state = TraceState::new();
        for item in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let prop = match item.strip_prefix("c(").and_then(|s| s.strip_suffix(')')) {
                Some(subject) => Prop::Cond(Atom::new(subject).map_err(|e| bad(&e.to_string()))?),
                None => Prop::Atom(Atom::new(item).map_err(|e| bad(&e.to_string()))?),
            };
            state.insert(prop);
        }
        states.push(state);
        rest = rest[body_end + 1..].trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
        }
    }
    Ok(states)
}

impl FromStr for Trace {
    type Err = OracleError;

    /// Parses `prefix: [{a,b},{}] loop: [{c}]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let rest = s
            .strip_prefix("prefix:")
            .ok_or_else(|| OracleError::TraceSyntax("expected `prefix:`".into()))?;
        let (prefix, cycle) = rest
            .split_once("loop:")
            .ok_or_else(|| OracleError::TraceSyntax("expected `loop:`".into()))?;
        Trace::new(parse_state_list(prefix)?, parse_state_list(cycle)?)
    }
}

struct Evaluator<'a> {
    trace: &'a Trace,
    furthest: Cell<usize>,
    memo: RefCell<HashMap<(*const Formula, usize), bool>>,
}

impl Evaluator<'_> {
    /// Raw positions reachable from normalized position `i`, one full lap of
    /// the loop at most.
    fn future(&self, i: usize) -> std::ops::Range<usize> {
        let p = self.trace.prefix.len();
        let end = if i < p {
            self.trace.len()
        } else {
            i + self.trace.cycle.len()
        };
        i..end
    }

    fn at(&self, f: &Formula, raw: usize) -> bool {
        self.furthest.set(self.furthest.get().max(raw));
        let i = self.trace.normalize(raw);
        let key = (f as *const Formula, i);
        if let Some(v) = self.memo.borrow().get(&key) {
            return *v;
        }
        let value = match f {
            Formula::Atom(a) => self.trace.state(i).contains(&Prop::Atom(a.clone())),
            Formula::Cond(a) => self.trace.state(i).contains(&Prop::Cond(a.clone())),
            Formula::Not(a) => !self.at(a, i),
            Formula::And(a, b) => self.at(a, i) && self.at(b, i),
            Formula::Or(a, b) => self.at(a, i) || self.at(b, i),
            Formula::Implies(a, b) => !self.at(a, i) || self.at(b, i),
            Formula::Eventually(a) => self.future(i).any(|j| self.at(a, j)),
            Formula::Always(a) => self.future(i).all(|j| self.at(a, j)),
            Formula::Next(a) => self.at(a, i + 1),
        };
        self.memo.borrow_mut().insert(key, value);
        value
    }
}

/// Truth of `f` at `position` of `t`.
pub fn holds_on_trace(t: &Trace, f: &Formula, position: usize) -> bool {
    holds_on_trace_instrumented(t, f, position).0
}

/// Like [`holds_on_trace`], also returning the largest raw position the
/// evaluation looked at. For next-free formulas this stays below
/// `prefix + 2 * loop`.
pub fn holds_on_trace_instrumented(t: &Trace, f: &Formula, position: usize) -> (bool, usize) {
    let eval = Evaluator {
        trace: t,
        furthest: Cell::new(0),
        memo: RefCell::new(HashMap::new()),
    };
    let value = eval.at(f, t.normalize(position));
    (value, eval.furthest.get())
}

/// True iff every formula of the goal set holds at position 0 of `t`.
pub fn confirm_counterexample(t: &Trace, goal: &VerificationGoal) -> bool {
    build_goal(goal).iter().all(|f| holds_on_trace(t, f, 0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchBounds {
    pub max_prefix: usize,
    pub max_loop: usize,
}

impl fmt::Display for SearchBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "prefix <= {}, loop <= {}", self.max_prefix, self.max_loop)
    }
}

fn temporal_subformulas<'a>(f: &'a Formula, out: &mut BTreeSet<&'a Formula>) {
    if matches!(f, Formula::Eventually(_) | Formula::Always(_)) {
        out.insert(f);
    }
    for c in f.children() {
        temporal_subformulas(c, out);
    }
}

/// `2 * (distinct temporal subformulas) + 2` for both bounds.
pub fn default_bounds<'a>(fs: impl IntoIterator<Item = &'a Formula>) -> SearchBounds {
    let mut temporal = BTreeSet::new();
    for f in fs {
        temporal_subformulas(f, &mut temporal);
    }
    let n = 2 * temporal.len() + 2;
    SearchBounds {
        max_prefix: n,
        max_loop: n,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(Trace),
    /// No model within the bounds; says nothing about larger traces.
    NoneUpToBound(SearchBounds),
}

type Tau = Vec<u64>;

#[derive(Debug, Clone, Copy)]
enum Node {
    Prop(u32),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Implies(usize, usize),
    Eventually(usize, usize),
    Always(usize, usize),
}

/// Formulas flattened into a post-ordered node list; temporal nodes own a
/// slot in the per-position value vector `Tau`.
struct Compiled {
    nodes: Vec<Node>,
    roots: Vec<usize>,
    slots: usize,
}

impl Compiled {
    fn new(fs: &[Formula], props: &[Prop]) -> Result<Self, OracleError> {
        let mut c = Compiled {
            nodes: Vec::new(),
            roots: Vec::new(),
            slots: 0,
        };
        let mut index = HashMap::new();
        for f in fs {
            let r = c.add(f, props, &mut index)?;
            c.roots.push(r);
        }
        Ok(c)
    }

    fn add(&mut self, f: &Formula, props: &[Prop], index: &mut HashMap<Formula, usize>) -> Result<usize, OracleError> {
        if let Some(&i) = index.get(f) {
            return Ok(i);
        }
        let node = match f {
            Formula::Atom(_) | Formula::Cond(_) => {
                let prop = match f {
                    Formula::Atom(a) => Prop::Atom(a.clone()),
                    Formula::Cond(a) => Prop::Cond(a.clone()),
                    _ => unreachable!(),
                };
                let bit = props.iter().position(|p| *p == prop).map_or(u32::MAX, |b| b as u32);
                Node::Prop(bit)
            }
            Formula::Not(a) => Node::Not(self.add(a, props, index)?),
            Formula::And(a, b) => Node::And(self.add(a, props, index)?, self.add(b, props, index)?),
            Formula::Or(a, b) => Node::Or(self.add(a, props, index)?, self.add(b, props, index)?),
            Formula::Implies(a, b) => Node::Implies(self.add(a, props, index)?, self.add(b, props, index)?),
            Formula::Eventually(a) => {
                let a = self.add(a, props, index)?;
                self.slots += 1;
                Node::Eventually(a, self.slots - 1)
            }
            Formula::Always(a) => {
                let a = self.add(a, props, index)?;
                self.slots += 1;
                Node::Always(a, self.slots - 1)
            }
            Formula::Next(_) => return Err(OracleError::ContainsNext),
        };
        self.nodes.push(node);
        index.insert(f.clone(), self.nodes.len() - 1);
        Ok(self.nodes.len() - 1)
    }

    fn empty_tau(&self) -> Tau {
        vec![0; self.slots.div_ceil(64).max(1)]
    }

    /// Values of every node at a position with state `v`, given the temporal
    /// values of the next position. Also returns this position's `Tau`.
    fn step(&self, v: u64, next: &Tau, vals: &mut Vec<bool>) -> Tau {
        let mut tau = self.empty_tau();
        vals.clear();
        for node in &self.nodes {
            let value = match *node {
                Node::Prop(bit) => bit != u32::MAX && (v >> bit) & 1 == 1,
                Node::Not(a) => !vals[a],
                Node::And(a, b) => vals[a] && vals[b],
                Node::Or(a, b) => vals[a] || vals[b],
                Node::Implies(a, b) => !vals[a] || vals[b],
                Node::Eventually(a, s) => vals[a] || get_slot(next, s),
                Node::Always(a, s) => vals[a] && get_slot(next, s),
            };
            if let Node::Eventually(_, s) | Node::Always(_, s) = *node {
                if value {
                    set_slot(&mut tau, s);
                }
            }
            vals.push(value);
        }
        tau
    }

    fn roots_hold(&self, vals: &[bool]) -> bool {
        self.roots.iter().all(|&r| vals[r])
    }

    /// Temporal values on a loop visiting exactly the states in `set`, plus
    /// whether the roots hold when the loop is entered at each member.
    fn loop_values(&self, set: &[u64]) -> (Tau, Vec<bool>) {
        let mut tau = self.empty_tau();
        let mut vals: Vec<Vec<bool>> = vec![Vec::with_capacity(self.nodes.len()); set.len()];
        for node in &self.nodes {
            match *node {
                Node::Eventually(a, s) | Node::Always(a, s) => {
                    let value = if matches!(node, Node::Eventually(..)) {
                        vals.iter().any(|row| row[a])
                    } else {
                        vals.iter().all(|row| row[a])
                    };
                    if value {
                        set_slot(&mut tau, s);
                    }
                    vals.iter_mut().for_each(|row| row.push(value));
                }
                _ => {
                    for (row, &v) in vals.iter_mut().zip(set) {
                        let value = match *node {
                            Node::Prop(bit) => bit != u32::MAX && (v >> bit) & 1 == 1,
                            Node::Not(a) => !row[a],
                            Node::And(a, b) => row[a] && row[b],
                            Node::Or(a, b) => row[a] || row[b],
                            Node::Implies(a, b) => !row[a] || row[b],
                            _ => unreachable!(),
                        };
                        row.push(value);
                    }
                }
            }
        }
        let entry_ok = vals.iter().map(|row| self.roots_hold(row)).collect();
        (tau, entry_ok)
    }
}

fn get_slot(tau: &Tau, slot: usize) -> bool {
    (tau[slot / 64] >> (slot % 64)) & 1 == 1
}

fn set_slot(tau: &mut Tau, slot: usize) {
    tau[slot / 64] |= 1 << (slot % 64);
}

/// Propositional formulas that must hold in every state: bodies of top-level
/// `[]`, split at conjunctions.
fn state_invariants<'a>(f: &'a Formula, everywhere: bool, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::Always(a) => state_invariants(a, true, out),
        Formula::And(a, b) => {
            state_invariants(a, everywhere, out);
            state_invariants(b, everywhere, out);
        }
        _ if everywhere && !f.is_temporal() => out.push(f),
        _ => {}
    }
}

fn eval_propositional(f: &Formula, v: u64, props: &[Prop]) -> bool {
    let bit = |p: Prop| props.iter().position(|q| *q == p).is_some_and(|b| (v >> b) & 1 == 1);
    match f {
        Formula::Atom(a) => bit(Prop::Atom(a.clone())),
        Formula::Cond(a) => bit(Prop::Cond(a.clone())),
        Formula::Not(a) => !eval_propositional(a, v, props),
        Formula::And(a, b) => eval_propositional(a, v, props) && eval_propositional(b, v, props),
        Formula::Or(a, b) => eval_propositional(a, v, props) || eval_propositional(b, v, props),
        Formula::Implies(a, b) => !eval_propositional(a, v, props) || eval_propositional(b, v, props),
        _ => unreachable!("invariants are propositional"),
    }
}

fn state_of(v: u64, props: &[Prop]) -> TraceState {
    props
        .iter()
        .enumerate()
        .filter(|(b, _)| (v >> b) & 1 == 1)
        .map(|(_, p)| p.clone())
        .collect()
}

/// Lexicographically least sequence of length `len` visiting exactly the
/// members of `set` (sorted), optionally starting with `first`.
fn least_cover(first: Option<u64>, set: &[u64], len: usize) -> Vec<u64> {
    let mut uncovered: BTreeSet<u64> = set.iter().copied().collect();
    let mut seq = Vec::with_capacity(len);
    if let Some(v) = first {
        seq.push(v);
        uncovered.remove(&v);
    }
    while seq.len() < len {
        let remaining = len - seq.len();
        let next = if uncovered.len() >= remaining {
            *uncovered.iter().next().expect("cover is feasible")
        } else {
            set[0]
        };
        uncovered.remove(&next);
        seq.push(next);
    }
    seq
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k == 0 || k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

struct LoopSet {
    members: Vec<u64>,
    tau: Tau,
    entry_ok: Vec<bool>,
}

struct Deadline {
    start: Instant,
    budget: Option<Duration>,
    expired: AtomicBool,
}

impl Deadline {
    fn check(&self) -> Result<(), OracleError> {
        let over = self.expired.load(Ordering::Relaxed) || self.budget.is_some_and(|b| self.start.elapsed() > b);
        if over {
            self.expired.store(true, Ordering::Relaxed);
            return Err(OracleError::ResourceLimit(self.start.elapsed()));
        }
        Ok(())
    }
}

/// Searches for a trace satisfying every formula of `fs` at position 0.
///
/// States range over subsets of `atoms`; propositions of `fs` outside `atoms`
/// are false everywhere. The result is the first model in the canonical order
/// described in the module docs.
pub fn search_model(
    fs: &[Formula],
    atoms: &BTreeSet<Prop>,
    bounds: SearchBounds,
    budget: Option<Duration>,
) -> Result<SearchOutcome, OracleError> {
    if bounds.max_loop == 0 {
        return Err(OracleError::ZeroBound);
    }
    if atoms.len() > 63 {
        return Err(OracleError::TooManyProps(atoms.len()));
    }
    let props: Vec<Prop> = atoms.iter().cloned().collect();
    let compiled = Compiled::new(fs, &props)?;
    let deadline = Deadline {
        start: Instant::now(),
        budget,
        expired: AtomicBool::new(false),
    };

    let mut invariants = Vec::new();
    for f in fs {
        state_invariants(f, false, &mut invariants);
    }
    let mut states = Vec::new();
    for v in 0..(1u64 << props.len()) {
        if invariants.iter().all(|inv| eval_propositional(inv, v, &props)) {
            states.push(v);
        }
        if v % 4096 == 0 {
            deadline.check()?;
        }
    }
    if states.is_empty() {
        return Ok(SearchOutcome::NoneUpToBound(bounds));
    }

    let mut loops: Vec<LoopSet> = Vec::new();
    let mut vals = Vec::new();
    for len in 1..=bounds.max_loop {
        if len <= states.len() {
            let batch: Result<Vec<LoopSet>, OracleError> = combinations(states.len(), len)
                .into_par_iter()
                .map(|combo| {
                    deadline.check()?;
                    let members: Vec<u64> = combo.iter().map(|&i| states[i]).collect();
                    let (tau, entry_ok) = compiled.loop_values(&members);
                    Ok(LoopSet { members, tau, entry_ok })
                })
                .collect();
            loops.extend(batch?);
        }

        // Candidate loops of exactly `len` positions entered directly.
        let mut best: Option<Vec<u64>> = None;
        for ls in &loops {
            for (k, &v) in ls.members.iter().enumerate() {
                if ls.entry_ok[k] {
                    let seq = least_cover(Some(v), &ls.members, len);
                    if best.as_ref().is_none_or(|b| seq < *b) {
                        best = Some(seq);
                    }
                }
            }
        }
        if let Some(seq) = best {
            return finish(fs, &props, Vec::new(), seq);
        }

        // reach[k]: temporal values at a position followed by k more prefix
        // positions and then the loop.
        let loop_taus: HashSet<Tau> = loops.iter().map(|l| l.tau.clone()).collect();
        let mut reach: Vec<HashSet<Tau>> = vec![loop_taus];
        for p in 1..=bounds.max_prefix {
            deadline.check()?;
            let last = &reach[p - 1];
            let mut found = None;
            for &v in &states {
                if last.iter().any(|t| {
                    compiled.step(v, t, &mut vals);
                    compiled.roots_hold(&vals)
                }) {
                    found = Some(v);
                    break;
                }
            }
            if let Some(first) = found {
                return extract(fs, &props, &compiled, &states, &loops, &reach, first, p, len);
            }
            if p < bounds.max_prefix {
                let mut next = HashSet::new();
                for t in last {
                    for &v in &states {
                        next.insert(compiled.step(v, t, &mut vals));
                    }
                }
                reach.push(next);
            }
        }
    }
    Ok(SearchOutcome::NoneUpToBound(bounds))
}

/// Rebuilds the least trace with `p` prefix positions and a loop of `len`,
/// given that its first state is `first`.
#[allow(clippy::too_many_arguments)]
fn extract(
    fs: &[Formula],
    props: &[Prop],
    compiled: &Compiled,
    states: &[u64],
    loops: &[LoopSet],
    reach: &[HashSet<Tau>],
    first: u64,
    p: usize,
    len: usize,
) -> Result<SearchOutcome, OracleError> {
    let mut vals = Vec::new();
    let mut prefix = vec![first];
    // temporal values the next position may take
    let mut acceptable: HashSet<Tau> = reach[p - 1]
        .iter()
        .filter(|t| {
            compiled.step(first, t, &mut vals);
            compiled.roots_hold(&vals)
        })
        .cloned()
        .collect();
    for i in 1..p {
        let candidates = &reach[p - 1 - i];
        let mut chosen = None;
        for &v in states {
            let next: HashSet<Tau> = candidates
                .iter()
                .filter(|t| acceptable.contains(&compiled.step(v, t, &mut vals)))
                .cloned()
                .collect();
            if !next.is_empty() {
                chosen = Some((v, next));
                break;
            }
        }
        let (v, next) = chosen.ok_or_else(|| OracleError::Internal("prefix reconstruction failed".into()))?;
        prefix.push(v);
        acceptable = next;
    }
    let cycle = loops
        .iter()
        .filter(|l| acceptable.contains(&l.tau))
        .map(|l| least_cover(None, &l.members, len))
        .min()
        .ok_or_else(|| OracleError::Internal("loop reconstruction failed".into()))?;
    finish(fs, props, prefix, cycle)
}

fn finish(fs: &[Formula], props: &[Prop], prefix: Vec<u64>, cycle: Vec<u64>) -> Result<SearchOutcome, OracleError> {
    let trace = Trace::new(
        prefix.iter().map(|&v| state_of(v, props)).collect(),
        cycle.iter().map(|&v| state_of(v, props)).collect(),
    )?;
    if !fs.iter().all(|f| holds_on_trace(&trace, f, 0)) {
        return Err(OracleError::Internal(format!("search produced a non-model {trace}")));
    }
    Ok(SearchOutcome::Found(trace))
}

/// Plain enumeration of every trace in canonical order, checking each with
/// [`holds_on_trace`]. Exponential; meant for cross-checking
/// [`search_model`] on tiny alphabets.
pub fn enumerate_first_model(fs: &[Formula], atoms: &BTreeSet<Prop>, bounds: SearchBounds) -> SearchOutcome {
    let props: Vec<Prop> = atoms.iter().cloned().collect();
    let alphabet = 1u64 << props.len();
    for len in 1..=bounds.max_loop {
        for p in 0..=bounds.max_prefix {
            let total = p + len;
            let mut seq = vec![0u64; total];
            loop {
                let trace = Trace::new(
                    seq[..p].iter().map(|&v| state_of(v, &props)).collect(),
                    seq[p..].iter().map(|&v| state_of(v, &props)).collect(),
                )
                .expect("loop is non-empty");
                if fs.iter().all(|f| holds_on_trace(&trace, f, 0)) {
                    return SearchOutcome::Found(trace);
                }
                // odometer, last position fastest
                let mut i = total;
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    seq[i] += 1;
                    if seq[i] < alphabet {
                        break;
                    }
                    seq[i] = 0;
                    if i == 0 {
                        i = usize::MAX;
                        break;
                    }
                }
                if i == usize::MAX {
                    break;
                }
            }
        }
    }
    SearchOutcome::NoneUpToBound(bounds)
}
