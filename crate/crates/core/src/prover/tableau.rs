//! Graph tableau for the `<>`/`[]` fragment.
//!
//! Pre-states are sets of closure formulas that must hold at a position.
//! Saturating a pre-state yields its states: locally consistent sets where
//! every conjunction, disjunction and temporal formula is unfolded one step.
//! A state's successor pre-state is the set of bodies of its `X` formulas.
//! States with no live successor, or holding an eventuality they can no
//! longer fulfil, are eliminated until nothing changes.

use std::collections::{HashMap, VecDeque};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use fixedbitset::FixedBitSet;
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use rayon::prelude::*;

use crate::formula::{nnf, Formula, Prop};
use crate::oracle::{Trace, TraceState};

#[derive(Debug, Clone)]
enum Kind {
    Lit {
        prop: Prop,
        positive: bool,
        complement: Option<usize>,
    },
    And(usize, usize),
    Or(usize, usize),
    /// Body and the id of `X` of this formula.
    Eventually(usize, usize),
    Always(usize, usize),
    Next(usize),
}

/// Interned closure of the input formulas in negation normal form.
struct Closure {
    kinds: Vec<Kind>,
    index: HashMap<Formula, usize>,
}

impl Closure {
    fn new(roots: &[Formula]) -> Self {
        let mut c = Closure {
            kinds: Vec::new(),
            index: HashMap::new(),
        };
        for r in roots {
            c.intern(r);
        }
        let negations: Vec<(usize, Formula)> = c
            .index
            .iter()
            .filter(|(_, &id)| matches!(c.kinds[id], Kind::Lit { .. }))
            .map(|(f, &id)| {
                let neg = match f {
                    Formula::Not(a) => (**a).clone(),
                    _ => Formula::not(f.clone()),
                };
                (id, neg)
            })
            .collect();
        for (id, neg) in negations {
            let other = c.index.get(&neg).copied();
            if let Kind::Lit { complement, .. } = &mut c.kinds[id] {
                *complement = other;
            }
        }
        c
    }

    fn intern(&mut self, f: &Formula) -> usize {
        if let Some(&id) = self.index.get(f) {
            return id;
        }
        let kind = match f {
            Formula::Atom(a) => Kind::Lit {
                prop: Prop::Atom(a.clone()),
                positive: true,
                complement: None,
            },
            Formula::Cond(a) => Kind::Lit {
                prop: Prop::Cond(a.clone()),
                positive: true,
                complement: None,
            },
            Formula::Not(inner) => match &**inner {
                Formula::Atom(a) => Kind::Lit {
                    prop: Prop::Atom(a.clone()),
                    positive: false,
                    complement: None,
                },
                Formula::Cond(a) => Kind::Lit {
                    prop: Prop::Cond(a.clone()),
                    positive: false,
                    complement: None,
                },
                _ => unreachable!("input is in negation normal form"),
            },
            Formula::And(a, b) => Kind::And(self.intern(a), self.intern(b)),
            Formula::Or(a, b) => Kind::Or(self.intern(a), self.intern(b)),
            Formula::Eventually(a) | Formula::Always(a) | Formula::Next(a) => {
                // reserve the id first: `X<>f` refers back to `<>f`
                let id = self.kinds.len();
                self.kinds.push(Kind::Next(usize::MAX));
                self.index.insert(f.clone(), id);
                let body = self.intern(a);
                self.kinds[id] = match f {
                    Formula::Eventually(_) => Kind::Eventually(body, self.intern(&Formula::next(f.clone()))),
                    Formula::Always(_) => Kind::Always(body, self.intern(&Formula::next(f.clone()))),
                    _ => Kind::Next(body),
                };
                return id;
            }
            Formula::Implies(..) => unreachable!("input is in negation normal form"),
        };
        let id = self.kinds.len();
        self.kinds.push(kind);
        self.index.insert(f.clone(), id);
        id
    }

    fn len(&self) -> usize {
        self.kinds.len()
    }

    /// Adds `id`; false on a literal clash.
    fn insert(&self, set: &mut FixedBitSet, id: usize) -> bool {
        if let Kind::Lit {
            complement: Some(c), ..
        } = self.kinds[id]
        {
            if set.contains(c) {
                return false;
            }
        }
        set.insert(id);
        true
    }

    /// Adding `id` to `set` is bound to produce a literal clash.
    fn blocked(&self, set: &FixedBitSet, id: usize) -> bool {
        match self.kinds[id] {
            Kind::Lit { complement, .. } => complement.is_some_and(|c| set.contains(c)),
            Kind::And(a, b) => self.blocked(set, a) || self.blocked(set, b),
            Kind::Or(a, b) => self.blocked(set, a) && self.blocked(set, b),
            Kind::Always(a, _) => self.blocked(set, a),
            Kind::Eventually(..) | Kind::Next(_) => false,
        }
    }

    /// All saturated, clash-free extensions of `pre`.
    fn saturate(&self, pre: &FixedBitSet, abort: &AtomicBool) -> Vec<FixedBitSet> {
        struct Branch {
            set: FixedBitSet,
            todo: Vec<usize>,
            /// Disjunctions and eventualities with neither side present.
            open: Vec<usize>,
        }
        let mut out = Vec::new();
        let mut stack = vec![Branch {
            set: FixedBitSet::with_capacity(self.len()),
            todo: pre.ones().collect(),
            open: Vec::new(),
        }];
        // set members are only added through here, so each is processed once
        let add = |b: &mut Branch, id: usize| -> bool {
            if b.set.contains(id) {
                return true;
            }
            if !self.insert(&mut b.set, id) {
                return false;
            }
            b.todo.push(id);
            true
        };
        'branches: while let Some(mut b) = stack.pop() {
            if abort.load(Ordering::Relaxed) {
                return Vec::new();
            }
            let first: Vec<usize> = std::mem::take(&mut b.todo);
            for id in first {
                if !add(&mut b, id) {
                    continue 'branches;
                }
            }
            loop {
                while let Some(id) = b.todo.pop() {
                    match self.kinds[id] {
                        Kind::And(x, y) | Kind::Always(x, y) => {
                            if !add(&mut b, x) || !add(&mut b, y) {
                                continue 'branches;
                            }
                        }
                        Kind::Or(..) | Kind::Eventually(..) => b.open.push(id),
                        _ => {}
                    }
                }
                // drop satisfied disjunctions, take forced ones
                let mut forced = Vec::new();
                let mut still_open = Vec::with_capacity(b.open.len());
                for &id in &b.open {
                    let (Kind::Or(x, y) | Kind::Eventually(x, y)) = self.kinds[id] else {
                        unreachable!()
                    };
                    if b.set.contains(x) || b.set.contains(y) {
                        continue;
                    }
                    match (self.blocked(&b.set, x), self.blocked(&b.set, y)) {
                        (true, true) => continue 'branches,
                        (true, false) => forced.push(y),
                        (false, true) => forced.push(x),
                        (false, false) => still_open.push(id),
                    }
                }
                b.open = still_open;
                if forced.is_empty() {
                    break;
                }
                for id in forced {
                    if !add(&mut b, id) {
                        continue 'branches;
                    }
                }
            }
            let Some((&id, rest)) = b.open.split_first() else {
                out.push(b.set);
                continue;
            };
            let (Kind::Or(x, y) | Kind::Eventually(x, y)) = self.kinds[id] else {
                unreachable!()
            };
            for choice in [y, x] {
                stack.push(Branch {
                    set: b.set.clone(),
                    todo: vec![choice],
                    open: rest.to_vec(),
                });
            }
        }
        out.sort();
        out.dedup();
        out
    }

    fn successor(&self, state: &FixedBitSet) -> FixedBitSet {
        let mut pre = FixedBitSet::with_capacity(self.len());
        for id in state.ones() {
            if let Kind::Next(body) = self.kinds[id] {
                pre.insert(body);
            }
        }
        pre
    }

    fn eventualities(&self) -> Vec<(usize, usize)> {
        self.kinds
            .iter()
            .enumerate()
            .filter_map(|(id, k)| match *k {
                Kind::Eventually(body, _) => Some((id, body)),
                _ => None,
            })
            .collect()
    }

    fn valuation(&self, state: &FixedBitSet) -> TraceState {
        state
            .ones()
            .filter_map(|id| match &self.kinds[id] {
                Kind::Lit {
                    prop, positive: true, ..
                } => Some(prop.clone()),
                _ => None,
            })
            .collect()
    }
}

pub(crate) struct Limits {
    pub max_states: usize,
    pub deadline: Instant,
}

pub(crate) enum Outcome {
    Sat(Trace),
    Unsat,
    ResourceLimit,
}

pub(crate) struct Run {
    pub outcome: Outcome,
    pub states: usize,
    pub eliminated: usize,
}

struct Graph {
    /// States of each pre-state, in discovery order.
    members: Vec<Vec<usize>>,
    sets: Vec<FixedBitSet>,
    successor: Vec<usize>,
}

impl Graph {
    /// Builds every pre-state reachable from `initial`, one layer at a time.
    /// Layers are saturated in parallel and merged in frontier order, so ids
    /// do not depend on scheduling.
    fn build(closure: &Closure, initial: FixedBitSet, limits: &Limits) -> Option<Graph> {
        let mut g = Graph {
            members: vec![Vec::new()],
            sets: Vec::new(),
            successor: Vec::new(),
        };
        let mut pres = vec![initial.clone()];
        let mut pre_index = HashMap::from([(initial, 0usize)]);
        let mut state_index: HashMap<FixedBitSet, usize> = HashMap::new();
        let mut frontier = vec![0usize];
        let abort = AtomicBool::new(false);
        while !frontier.is_empty() {
            let expanded: Vec<Vec<FixedBitSet>> = frontier
                .par_iter()
                .map(|&p| {
                    if Instant::now() > limits.deadline {
                        abort.store(true, Ordering::Relaxed);
                    }
                    closure.saturate(&pres[p], &abort)
                })
                .collect();
            if abort.load(Ordering::Relaxed) {
                return None;
            }
            let mut next = Vec::new();
            for (&p, states) in frontier.iter().zip(expanded) {
                for set in states {
                    let id = match state_index.get(&set) {
                        Some(&id) => id,
                        None => {
                            let succ = closure.successor(&set);
                            let succ_id = *pre_index.entry(succ.clone()).or_insert_with(|| {
                                pres.push(succ);
                                g.members.push(Vec::new());
                                next.push(pres.len() - 1);
                                pres.len() - 1
                            });
                            g.sets.push(set.clone());
                            g.successor.push(succ_id);
                            state_index.insert(set, g.sets.len() - 1);
                            g.sets.len() - 1
                        }
                    };
                    g.members[p].push(id);
                }
                if g.sets.len() > limits.max_states || Instant::now() > limits.deadline {
                    return None;
                }
            }
            frontier = next;
        }
        Some(g)
    }

    fn live_successors<'a>(&'a self, s: usize, alive: &'a [bool]) -> impl Iterator<Item = usize> + 'a {
        self.members[self.successor[s]].iter().copied().filter(|&t| alive[t])
    }
}

/// Removes states without live successors and states with unfulfillable
/// eventualities, to a fixpoint. Returns the number eliminated.
fn eliminate(closure: &Closure, g: &Graph, alive: &mut [bool], limits: &Limits) -> Option<usize> {
    let n = g.sets.len();
    let mut member_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (p, ms) in g.members.iter().enumerate() {
        for &s in ms {
            member_of[s].push(p);
        }
    }
    let mut predecessors: Vec<Vec<usize>> = vec![Vec::new(); g.members.len()];
    for (s, &p) in g.successor.iter().enumerate() {
        predecessors[p].push(s);
    }
    let mut live_count: Vec<usize> = g.members.iter().map(|ms| ms.len()).collect();
    let mut eliminated = 0;

    let mut kill = |start: Vec<usize>, alive: &mut [bool], eliminated: &mut usize| {
        let mut queue: VecDeque<usize> = start.into();
        while let Some(s) = queue.pop_front() {
            if !alive[s] {
                continue;
            }
            alive[s] = false;
            *eliminated += 1;
            for &p in &member_of[s] {
                live_count[p] -= 1;
                if live_count[p] == 0 {
                    queue.extend(predecessors[p].iter().copied().filter(|&t| alive[t]));
                }
            }
        }
    };

    let dead_ends: Vec<usize> = (0..n).filter(|&s| g.members[g.successor[s]].is_empty()).collect();
    kill(dead_ends, alive, &mut eliminated);

    let eventualities = closure.eventualities();
    loop {
        let mut changed = false;
        for &(ev, body) in &eventualities {
            if Instant::now() > limits.deadline {
                return None;
            }
            // states from which a live state containing `body` is reachable
            let mut good = vec![false; n];
            let mut queue: VecDeque<usize> = VecDeque::new();
            for s in 0..n {
                if alive[s] && g.sets[s].contains(body) {
                    good[s] = true;
                    queue.push_back(s);
                }
            }
            let mut pre_good = vec![false; g.members.len()];
            while let Some(s) = queue.pop_front() {
                for &p in &member_of[s] {
                    if !pre_good[p] {
                        pre_good[p] = true;
                        for &t in &predecessors[p] {
                            if alive[t] && !good[t] {
                                good[t] = true;
                                queue.push_back(t);
                            }
                        }
                    }
                }
            }
            let doomed: Vec<usize> = (0..n)
                .filter(|&s| alive[s] && !good[s] && g.sets[s].contains(ev))
                .collect();
            if !doomed.is_empty() {
                changed = true;
                kill(doomed, alive, &mut eliminated);
            }
        }
        if !changed {
            return Some(eliminated);
        }
    }
}

/// Shortest path from `from` to a state satisfying `goal` inside `scope`,
/// taking at least one step. Excludes `from`, includes the target.
fn path_within(
    g: &Graph,
    alive: &[bool],
    scope: &[bool],
    from: usize,
    goal: impl Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    // (state, index of the parent record)
    let mut records: Vec<(usize, usize)> = vec![(from, usize::MAX)];
    let mut seen = vec![false; g.sets.len()];
    let mut head = 0;
    while head < records.len() {
        let s = records[head].0;
        for t in g.live_successors(s, alive) {
            if !scope[t] || seen[t] {
                continue;
            }
            seen[t] = true;
            records.push((t, head));
            if goal(t) {
                let mut path = Vec::new();
                let mut r = records.len() - 1;
                while r != 0 {
                    path.push(records[r].0);
                    r = records[r].1;
                }
                path.reverse();
                return Some(path);
            }
        }
        head += 1;
    }
    None
}

/// A lasso through live states starting at the first live initial state.
fn extract(closure: &Closure, g: &Graph, alive: &[bool]) -> Trace {
    let start = *g.members[0]
        .iter()
        .find(|&&s| alive[s])
        .expect("an initial state survived");

    let mut order = vec![start];
    let mut parent: HashMap<usize, usize> = HashMap::new();
    let mut reached = vec![false; g.sets.len()];
    reached[start] = true;
    let mut i = 0;
    while i < order.len() {
        let s = order[i];
        for t in g.live_successors(s, alive) {
            if !reached[t] {
                reached[t] = true;
                parent.insert(t, s);
                order.push(t);
            }
        }
        i += 1;
    }

    let mut graph = DiGraph::<usize, ()>::new();
    let nodes: HashMap<usize, NodeIndex> = order.iter().map(|&s| (s, graph.add_node(s))).collect();
    for &s in &order {
        for t in g.live_successors(s, alive) {
            graph.add_edge(nodes[&s], nodes[&t], ());
        }
    }
    let rank: HashMap<usize, usize> = order.iter().enumerate().map(|(r, &s)| (s, r)).collect();
    let bottom = tarjan_scc(&graph)
        .into_iter()
        .map(|scc| scc.into_iter().map(|n| graph[n]).collect::<Vec<usize>>())
        .filter(|scc| {
            scc.iter()
                .all(|&s| g.live_successors(s, alive).all(|t| scc.contains(&t)))
        })
        .min_by_key(|scc| scc.iter().map(|s| rank[s]).min())
        .expect("every live state has a live successor");
    let entry = *bottom
        .iter()
        .min_by_key(|s| rank[*s])
        .expect("components are non-empty");

    let mut prefix = Vec::new();
    let mut cur = entry;
    while let Some(&p) = parent.get(&cur) {
        prefix.push(p);
        cur = p;
    }
    prefix.reverse();

    let mut scope = vec![false; g.sets.len()];
    for &s in &bottom {
        scope[s] = true;
    }
    let mut cycle = vec![entry];
    let mut cur = entry;
    for (ev, body) in closure.eventualities() {
        let needed = bottom.iter().any(|&s| g.sets[s].contains(ev));
        if !needed || cycle.iter().any(|&s| g.sets[s].contains(body)) {
            continue;
        }
        let path = path_within(g, alive, &scope, cur, |t| g.sets[t].contains(body))
            .expect("eventualities are fulfilled inside a bottom component");
        cur = *path.last().expect("paths are non-empty");
        cycle.extend(path);
    }
    let mut back =
        path_within(g, alive, &scope, cur, |t| t == entry).expect("bottom components are strongly connected");
    back.pop();
    cycle.extend(back);

    let render = |ids: &[usize]| ids.iter().map(|&s| closure.valuation(&g.sets[s])).collect();
    Trace::new(render(&prefix), render(&cycle)).expect("cycle contains the entry state")
}

/// Decides satisfiability of the conjunction of `fs` (next-free).
pub(crate) fn run(fs: &[Formula], limits: &Limits) -> Run {
    let roots: Vec<Formula> = fs.iter().map(nnf).collect();
    let closure = Closure::new(&roots);
    let mut initial = FixedBitSet::with_capacity(closure.len());
    for r in &roots {
        initial.insert(closure.index[r]);
    }
    let Some(g) = Graph::build(&closure, initial, limits) else {
        return Run {
            outcome: Outcome::ResourceLimit,
            states: 0,
            eliminated: 0,
        };
    };
    let mut alive = vec![true; g.sets.len()];
    let Some(eliminated) = eliminate(&closure, &g, &mut alive, limits) else {
        return Run {
            outcome: Outcome::ResourceLimit,
            states: g.sets.len(),
            eliminated: 0,
        };
    };
    let outcome = if g.members[0].iter().any(|&s| alive[s]) {
        Outcome::Sat(extract(&closure, &g, &alive))
    } else {
        Outcome::Unsat
    };
    Run {
        outcome,
        states: g.sets.len(),
        eliminated,
    }
}
