mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{conjunctive_formula, formula, formula_with_conditions, trace, workflow_text};
use proptest::prelude::*;
use wfspec::formula::{closure, nnf, parse_formula, print_formula, Atom, Formula, Prop};
use wfspec::oracle::{
    default_bounds, enumerate_first_model, holds_on_trace, holds_on_trace_instrumented, search_model, SearchBounds,
    SearchOutcome,
};
use wfspec::pattern::{instantiate_pattern, parse_pattern_set, PatternDefinition, PatternSet};
use wfspec::prover::{decide_satisfiable, ProverConfig, Satisfiability};
use wfspec::specgen::{generate_for_expr, write_spec_file};
use wfspec::workflow::{parse_workflow_expr, WorkflowArg};

fn atoms(names: &[&str]) -> BTreeSet<Prop> {
    names.iter().map(|n| Prop::Atom(Atom::new(*n).unwrap())).collect()
}

fn same_answer(x: &Satisfiability, y: &Satisfiability) -> bool {
    matches!(
        (x, y),
        (Satisfiability::Sat(_), Satisfiability::Sat(_))
            | (Satisfiability::Unsat, Satisfiability::Unsat)
            | (Satisfiability::ResourceLimit, Satisfiability::ResourceLimit)
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn print_parse_round_trip(f in formula_with_conditions()) {
        let text = print_formula(&f).unwrap();
        prop_assert_eq!(parse_formula(&text).unwrap(), f);
    }

    #[test]
    fn nnf_preserves_truth(f in formula(), t in trace()) {
        let g = nnf(&f);
        for i in 0..t.len() {
            prop_assert_eq!(holds_on_trace(&t, &f, i), holds_on_trace(&t, &g, i));
        }
    }

    #[test]
    fn closure_is_idempotent_and_extensive(f in formula()) {
        let g = nnf(&f);
        let once = closure([&g]);
        prop_assert!(once.contains(&g));
        let twice = closure(once.iter());
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn loop_shift_invariance(f in formula(), t in trace()) {
        for i in t.prefix().len()..t.len() {
            prop_assert_eq!(holds_on_trace(&t, &f, i), holds_on_trace(&t, &f, i + t.cycle().len()));
        }
    }

    #[test]
    fn evaluation_stays_within_bound(f in formula(), t in trace()) {
        let limit = t.prefix().len() + 2 * t.cycle().len();
        for i in 0..t.len() {
            let (_, furthest) = holds_on_trace_instrumented(&t, &f, i);
            prop_assert!(furthest < limit, "position {} inspected, limit {}", furthest, limit);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn search_agrees_with_plain_enumeration(f in formula(), g in formula()) {
        let fs = [f, g];
        let bounds = SearchBounds { max_prefix: 2, max_loop: 2 };
        let ab = atoms(&["a", "b", "c"]);
        let fast = search_model(&fs, &ab, bounds, None).unwrap();
        prop_assert_eq!(fast, enumerate_first_model(&fs, &ab, bounds));
    }

    #[test]
    fn prover_agrees_with_oracle(phi in conjunctive_formula()) {
        let fs = [phi.clone()];
        match decide_satisfiable(&fs, &ProverConfig::default()).unwrap().0 {
            Satisfiability::Sat(t) => prop_assert!(holds_on_trace(&t, &phi, 0)),
            Satisfiability::Unsat => {
                let outcome = search_model(&fs, &phi.props(), default_bounds(&fs), None).unwrap();
                prop_assert!(matches!(outcome, SearchOutcome::NoneUpToBound(_)), "{:?}", outcome);
            }
            Satisfiability::ResourceLimit => prop_assert!(false, "resource limit on {}", phi),
        }
    }

    #[test]
    fn duality_of_eventually_and_always(f in formula()) {
        let cfg = ProverConfig::default();
        let (x, _) = decide_satisfiable(&[Formula::not(Formula::eventually(f.clone()))], &cfg).unwrap();
        let (y, _) = decide_satisfiable(&[Formula::always(nnf(&Formula::not(f)))], &cfg).unwrap();
        prop_assert!(same_answer(&x, &y), "{:?} vs {:?}", x, y);
    }

    #[test]
    fn answer_ignores_order_and_threads(f in formula(), g in formula(), h in formula()) {
        let forward = [f.clone(), g.clone(), h.clone()];
        let backward = [h, g, f];
        let one = ProverConfig { threads: Some(1), ..ProverConfig::default() };
        let four = ProverConfig { threads: Some(4), ..ProverConfig::default() };
        let (x, _) = decide_satisfiable(&forward, &one).unwrap();
        let (y, _) = decide_satisfiable(&backward, &four).unwrap();
        let (z, _) = decide_satisfiable(&forward, &four).unwrap();
        prop_assert!(same_answer(&x, &y));
        prop_assert_eq!(x, z);
    }
}

fn pattern_definition() -> impl Strategy<Value = PatternDefinition> {
    let params = ["f1", "f2", "f3", "f4"];
    let leaf = prop_oneof![
        Just(Formula::var("f1")),
        Just(Formula::var("f2")),
        Just(Formula::var("f3")),
        Just(Formula::var("f4")),
        Just(Formula::cond("f2")),
    ];
    let template = leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Formula::and(x, y)),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Formula::implies(x, y)),
            inner.clone().prop_map(Formula::eventually),
            inner.prop_map(Formula::always),
        ]
    });
    proptest::collection::vec(template, 1..6).prop_map(move |templates| {
        let params = params.iter().map(|p| Atom::new(*p).unwrap()).collect();
        PatternDefinition::new("Random", params, templates).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn pattern_text_round_trip(def in pattern_definition()) {
        let set = PatternSet::from_definitions(vec![def]).unwrap();
        let reparsed = parse_pattern_set(&set.to_text()).unwrap();
        prop_assert_eq!(reparsed.patterns()[0].templates(), set.patterns()[0].templates());
    }

    #[test]
    fn identity_instantiation(def in pattern_definition()) {
        let args: Vec<Formula> = def.params().iter().cloned().map(Formula::Atom).collect();
        prop_assert_eq!(instantiate_pattern(&def, &args).unwrap(), def.templates().to_vec());
    }

    #[test]
    fn instances_only_mention_arguments(def in pattern_definition()) {
        let args: Vec<Formula> = ["u", "v", "w", "z"].iter().map(|n| Formula::var(n)).collect();
        for f in instantiate_pattern(&def, &args).unwrap() {
            for p in f.props() {
                prop_assert!(["u", "v", "w", "z"].contains(&p.subject().name()));
            }
        }
    }

    #[test]
    fn workflow_properties(text in workflow_text()) {
        let set = PatternSet::standard();
        let w = parse_workflow_expr(&text, &set).unwrap();

        // printing and re-parsing
        prop_assert_eq!(&parse_workflow_expr(&w.to_string(), &set).unwrap(), &w);

        // atoms are unique
        let all = w.atoms();
        let distinct: BTreeSet<_> = all.iter().collect();
        prop_assert_eq!(all.len(), distinct.len());

        // joined entry and exit follow the first and last argument
        for node in w.occurrences() {
            if let Some(WorkflowArg::Pattern(first)) = node.args.first() {
                prop_assert_eq!(node.joined_entry(), first.joined_entry());
            }
            if let Some(WorkflowArg::Pattern(last)) = node.args.last() {
                prop_assert_eq!(node.joined_exit(), last.joined_exit());
            }
        }

        let spec = generate_for_expr(&w, &set, "W").unwrap();
        let budget: usize = w.occurrences().iter().map(|n| set.resolve(&n.pattern).unwrap().templates().len()).sum();
        prop_assert!(spec.len() <= budget);

        // atoms of the model and of the specification coincide
        let model_atoms: BTreeSet<String> = all.iter().map(|a| a.name().to_string()).collect();
        let spec_atoms: BTreeSet<String> = spec.atom_universe().iter().map(|p| p.subject().name().to_string()).collect();
        prop_assert_eq!(model_atoms, spec_atoms);

        // each formula is its template with parameters replaced by arguments,
        // where a nested pattern stands for `entry | exit`
        let occurrences = w.occurrences();
        for e in spec.entries() {
            let prov = e.provenance.as_ref().unwrap();
            let node = occurrences[prov.occurrence];
            let def = set.resolve(&node.pattern).unwrap();
            let binding: BTreeMap<Atom, Formula> = def
                .params()
                .iter()
                .cloned()
                .zip(node.args.iter().map(|a| match a {
                    WorkflowArg::Atom(x) => Formula::Atom(x.clone()),
                    WorkflowArg::Pattern(r) => Formula::or(
                        Formula::Atom(r.joined_entry().clone()),
                        Formula::Atom(r.joined_exit().clone()),
                    ),
                }))
                .collect();
            prop_assert_eq!(&def.templates()[prov.template].substitute(&binding).unwrap(), &e.formula);
        }

        // deterministic output
        let again = generate_for_expr(&w, &set, "W").unwrap();
        prop_assert_eq!(write_spec_file(&spec), write_spec_file(&again));
    }
}
