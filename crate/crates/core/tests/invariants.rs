use std::fs;

use ema_core::doc::Document;
use ema_core::engine::{run, ChoiceSource, Outcome};
use ema_core::machines::{derivation_closure, grammar_derives, grammar_step, tm_run, Grammar, WindowTm};
use ema_core::translate::{compare_tm, gra_input, gra_shape, gra_word, grammar_to_ema, tm_to_ema, Lockstep};
use proptest::prelude::*;

fn load(rel: &str) -> Document {
    let path = format!("{}/../../corpus/{rel}", env!("CARGO_MANIFEST_DIR"));
    Document::parse(&fs::read_to_string(&path).expect("readable")).expect("valid document")
}

fn grammar(name: &str) -> Grammar {
    match load(&format!("grammar/{name}.json")) {
        Document::Grammar(g) => g,
        _ => panic!("{name}"),
    }
}

fn machine(name: &str) -> WindowTm {
    match load(&format!("tm/{name}.json")) {
        Document::Tm(m) => m,
        _ => panic!("{name}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closure_grows_by_single_steps(depth in 0usize..4, name in prop::sample::select(vec!["anbn", "dyck", "swap"])) {
        let g = grammar(name);
        let start = if name == "swap" { "bbaa" } else { "S" };
        let inner = derivation_closure(&g, start, depth);
        let outer = derivation_closure(&g, start, depth + 1);
        prop_assert!(inner.is_subset(&outer));
        for w in outer.difference(&inner) {
            let reached = inner.iter().any(|u| {
                (0..g.rules.len()).any(|r| (0..u.chars().count() as u64).any(|p| grammar_step(&g, u, r, p) == *w))
            });
            prop_assert!(reached, "{w} has no predecessor");
        }
    }

    #[test]
    fn derivations_are_chains_of_steps(depth in 1usize..4, pick in any::<prop::sample::Index>()) {
        let g = grammar("dyck");
        let words: Vec<String> = derivation_closure(&g, "S", depth).into_iter().collect();
        let target = pick.get(&words);
        let path = grammar_derives(&g, "S", target, depth).expect("target is in the closure");
        prop_assert_eq!(path.first().map(String::as_str), Some("S"));
        prop_assert_eq!(path.last(), Some(target));
        for pair in path.windows(2) {
            let (u, v) = (&pair[0], &pair[1]);
            let linked = (0..g.rules.len())
                .any(|r| (0..u.chars().count() as u64).any(|p| grammar_step(&g, u, r, p) == *v));
            prop_assert!(linked, "{u} -> {v}");
        }
    }

    #[test]
    fn seeded_grammar_runs_stay_in_the_closure(seed in any::<u64>(), steps in 0usize..5) {
        let g = grammar("dyck");
        let e = grammar_to_ema(&g).unwrap();
        let shape = gra_shape(&e).unwrap();
        let input = gra_input(&shape, "S");
        let first = run(&e, &input, &ChoiceSource::seeded(seed), steps).unwrap();
        let again = run(&e, &input, &ChoiceSource::seeded(seed), steps).unwrap();
        prop_assert_eq!(&first, &again);
        let word = gra_word(&shape, first.final_state()).expect("word stays defined");
        prop_assert!(derivation_closure(&g, "S", first.steps).contains(&word));
    }

    #[test]
    fn translated_machines_keep_pace(word in prop::collection::vec(1usize..3, 0..8)) {
        for name in ["anbn", "even_a", "sort"] {
            let m = machine(name);
            let e = tm_to_ema(&m).unwrap();
            let verdict = compare_tm(&m, &e, &word, 300).unwrap();
            let steps = tm_run(&m, &word, 300).steps;
            prop_assert!(matches!(verdict, Lockstep::Agree { steps: s, .. } if s == steps), "{name}: {verdict}");
        }
    }

    #[test]
    fn step_bound_is_respected(seed in any::<u64>(), bound in 0usize..6) {
        let e = grammar_to_ema(&grammar("anbn")).unwrap();
        let shape = gra_shape(&e).unwrap();
        let trace = run(&e, &gra_input(&shape, "S"), &ChoiceSource::seeded(seed), bound).unwrap();
        prop_assert!(trace.steps <= bound);
        prop_assert_eq!(trace.states.len(), trace.steps + 1);
        if trace.steps < bound {
            prop_assert_ne!(trace.outcome, Outcome::StepLimit);
        }
    }
}
