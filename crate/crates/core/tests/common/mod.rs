#![allow(dead_code)]

use std::path::PathBuf;

use proptest::prelude::*;
use wfspec::formula::{Formula, Prop};
use wfspec::oracle::{Trace, TraceState};
use wfspec::pattern::PatternSet;
use wfspec::prover::Verdict;
use wfspec::specgen::{generate_for_expr, parse_spec_file};
use wfspec::workflow::parse_workflow_expr;

pub fn manifest_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

pub fn golden(name: &str) -> Vec<Formula> {
    let text = std::fs::read_to_string(manifest_path(&format!("tests/golden/{name}"))).unwrap();
    parse_spec_file(&text).unwrap().formulas().cloned().collect()
}

pub fn generate(expr: &str, label: &str) -> Vec<Formula> {
    let set = PatternSet::standard();
    let w = parse_workflow_expr(expr, &set).unwrap();
    generate_for_expr(&w, &set, label)
        .unwrap()
        .formulas()
        .cloned()
        .collect()
}

pub fn temporal_operators(f: &Formula) -> usize {
    let own = usize::from(matches!(f, Formula::Eventually(_) | Formula::Always(_)));
    own + f.children().into_iter().map(temporal_operators).sum::<usize>()
}

/// Next-free formulas over `a`, `b`, `c` with at most six temporal operators.
pub fn formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![Just("a"), Just("b"), Just("c")].prop_map(Formula::var);
    leaf.prop_recursive(5, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Formula::and(x, y)),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Formula::or(x, y)),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Formula::implies(x, y)),
            inner.clone().prop_map(Formula::eventually),
            inner.prop_map(Formula::always),
        ]
    })
    .prop_filter("at most six temporal operators", |f| temporal_operators(f) <= 6)
}

/// Like [`formula`], with condition atoms among the leaves.
pub fn formula_with_conditions() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::var("a")),
        Just(Formula::var("b")),
        Just(Formula::cond("a")),
        Just(Formula::var("c_2")),
    ];
    leaf.prop_recursive(5, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Formula::and(x, y)),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Formula::or(x, y)),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Formula::implies(x, y)),
            inner.clone().prop_map(Formula::eventually),
            inner.prop_map(Formula::always),
        ]
    })
}

fn state() -> impl Strategy<Value = TraceState> {
    proptest::collection::btree_set(prop_oneof![Just("a"), Just("b"), Just("c")], 0..=3).prop_map(|names| {
        names
            .into_iter()
            .map(|n| match Formula::var(n) {
                Formula::Atom(a) => Prop::Atom(a),
                _ => unreachable!(),
            })
            .collect()
    })
}

/// Traces over `a`, `b`, `c` with prefix at most 4 and loop at most 3.
pub fn trace() -> impl Strategy<Value = Trace> {
    (
        proptest::collection::vec(state(), 0..=4),
        proptest::collection::vec(state(), 1..=3),
    )
        .prop_map(|(p, l)| Trace::new(p, l).unwrap())
}

/// Hand-audited validity checks: (formula, expected verdict).
pub const CURATED: &[(&str, Verdict)] = &[
    ("[](p => q) => ([]p => []q)", Verdict::Proved),
    ("<>p => ~[]~p", Verdict::Proved),
    ("~[]~p => <>p", Verdict::Proved),
    ("<>p => []p", Verdict::Refuted),
    ("<>(p & q) => <>p & <>q", Verdict::Proved),
    ("<>p & <>q => <>(p & q)", Verdict::Refuted),
    ("[]p => p", Verdict::Proved),
    ("[]p => [][]p", Verdict::Proved),
    ("<><>p => <>p", Verdict::Proved),
    ("[]<>p => <>[]p", Verdict::Refuted),
    ("<>[]p => []<>p", Verdict::Proved),
    ("[](p & q) => []p & []q", Verdict::Proved),
    ("[]p | []q => [](p | q)", Verdict::Proved),
    ("[](p | q) => []p | []q", Verdict::Refuted),
    ("p => <>p", Verdict::Proved),
    ("<>(p | q) => <>p | <>q", Verdict::Proved),
];

/// Random workflow expressions over the standard patterns with distinct
/// atoms `x0, x1, ...`. The conditioned parameter of `Loop` stays atomic.
pub fn workflow_text() -> impl Strategy<Value = String> {
    #[derive(Debug, Clone)]
    enum Shape {
        Leaf,
        Node(&'static str, Vec<Shape>),
    }
    let shape = Just(Shape::Leaf).prop_recursive(3, 16, 4, |inner| {
        prop_oneof![
            proptest::collection::vec(inner.clone(), 2).prop_map(|a| Shape::Node("Seq", a)),
            proptest::collection::vec(inner.clone(), 4).prop_map(|a| Shape::Node("Concur", a)),
            proptest::collection::vec(inner.clone(), 4).prop_map(|a| Shape::Node("Branch", a)),
            (inner.clone(), inner.clone(), inner).prop_map(|(x, y, z)| Shape::Node("Loop", vec![x, Shape::Leaf, y, z])),
        ]
    });
    let root = (shape, 0usize..4).prop_map(|(s, k)| match s {
        Shape::Leaf => Shape::Node(
            ["Seq", "Concur", "Branch", "Loop"][k],
            vec![Shape::Leaf; if k == 0 { 2 } else { 4 }],
        ),
        node => node,
    });
    fn render(s: &Shape, next: &mut usize) -> String {
        match s {
            Shape::Leaf => {
                *next += 1;
                format!("x{}", *next - 1)
            }
            Shape::Node(name, args) => {
                let parts: Vec<String> = args.iter().map(|a| render(a, next)).collect();
                format!("{name}({})", parts.join(", "))
            }
        }
    }
    root.prop_map(|s| render(&s, &mut 0))
}

/// Conjunctions of three [`formula`]s, still within six temporal operators.
/// Unsatisfiable instances are far more frequent than with a single formula.
pub fn conjunctive_formula() -> impl Strategy<Value = Formula> {
    (formula(), formula(), formula())
        .prop_map(|(x, y, z)| Formula::and(Formula::and(x, y), z))
        .prop_filter("at most six temporal operators", |f| temporal_operators(f) <= 6)
}
