use std::fs;
use std::path::PathBuf;

use ema_core::doc::Document;
use ema_core::engine::{run, ChoiceSource, Ema, Outcome};
use ema_core::machines::{tm_run, tram_run, MachineOutcome};
use ema_core::translate::{check_class, grammar_to_ema, tm_to_ema, tram_to_ema, ClassId};

fn corpus_dir(kind: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(kind)
}

fn documents(kind: &str) -> Vec<(String, Document)> {
    let mut paths: Vec<PathBuf> =
        fs::read_dir(corpus_dir(kind)).expect("corpus directory").map(|e| e.expect("entry").path()).collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let text = fs::read_to_string(&p).expect("readable");
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            let doc = Document::parse(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, doc)
        })
        .collect()
}

fn load(rel: &str) -> Document {
    let text = fs::read_to_string(corpus_dir("").join(rel)).expect("readable");
    Document::parse(&text).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

#[test]
fn emitted_documents_parse_back_unchanged() {
    for kind in ["ema", "tm", "tram", "grammar", "input"] {
        for (name, doc) in documents(kind) {
            let again = Document::parse(&doc.to_json()).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(again.body_json(), doc.body_json(), "{kind}/{name}");
        }
    }
}

#[test]
fn translated_machines_land_in_their_class() {
    for (name, doc) in documents("tm") {
        let Document::Tm(m) = doc else { panic!("{name}") };
        let report = check_class(&tm_to_ema(&m).unwrap(), ClassId::Wt);
        assert!(report.ok(), "{name}: {report}");
    }
    for (name, doc) in documents("tram") {
        let Document::Tram(t) = doc else { panic!("{name}") };
        let report = check_class(&tram_to_ema(&t).unwrap(), ClassId::Tram);
        assert!(report.ok(), "{name}: {report}");
    }
    for (name, doc) in documents("grammar") {
        let Document::Grammar(g) = doc else { panic!("{name}") };
        let report = check_class(&grammar_to_ema(&g).unwrap(), ClassId::Gra);
        assert!(report.ok(), "{name}: {report}");
    }
}

#[test]
fn class_checkers_do_not_overlap_on_the_corpus() {
    let Document::Tm(m) = load("tm/marker.json") else { panic!() };
    let wt = tm_to_ema(&m).unwrap();
    assert!(!check_class(&wt, ClassId::Tram).ok());
    assert!(!check_class(&wt, ClassId::Gra).ok());
}

fn ema(doc: Document) -> Ema {
    match doc {
        Document::Ema(e) => *e,
        Document::Tm(m) => tm_to_ema(&m).unwrap(),
        Document::Tram(t) => tram_to_ema(&t).unwrap(),
        Document::Grammar(g) => grammar_to_ema(&g).unwrap(),
        _ => panic!("not a machine"),
    }
}

#[test]
fn word_inputs_drive_window_machines() {
    let Document::Tm(m) = load("tm/anbn.json") else { panic!() };
    let e = ema(Document::Tm(m.clone()));
    for (file, accepted) in [("aabb", true), ("ab", true), ("aba", false), ("empty", true)] {
        let Document::Input(input) = load(&format!("input/{file}.json")) else { panic!() };
        let word = input.tm_word(&m).unwrap();
        let machine = tm_run(&m, &word, 500);
        let trace = run(&e, &input.to_input(&e).unwrap(), &ChoiceSource::none(), 500).unwrap();
        let expected = if accepted { MachineOutcome::Accepted } else { MachineOutcome::Rejected };
        assert_eq!(machine.outcome, expected, "{file}");
        assert_eq!(trace.outcome, if accepted { Outcome::Accepted } else { Outcome::Rejected }, "{file}");
        assert_eq!(trace.steps, machine.steps + 1, "{file}");
    }
}

#[test]
fn memory_inputs_drive_trams() {
    let Document::Tram(t) = load("tram/sum.json") else { panic!() };
    let e = ema(Document::Tram(t.clone()));
    let Document::Input(input) = load("input/mem_sum.json") else { panic!() };
    let machine = tram_run(&t, input.memory().unwrap().clone(), 100);
    let trace = run(&e, &input.to_input(&e).unwrap(), &ChoiceSource::none(), 100).unwrap();
    assert_eq!(trace.steps, machine.steps + 1);
    assert!(matches!(trace.outcome, Outcome::Accepted | Outcome::Rejected));
}

#[test]
fn scripted_derivation_reaches_its_target() {
    let Document::Grammar(g) = load("grammar/anbn.json") else { panic!() };
    let e = ema(Document::Grammar(g));
    let Document::Input(input) = load("input/start.json") else { panic!() };
    let Document::Choices(choices) = load("input/derive_aabb.json") else { panic!() };
    let trace = run(&e, &input.to_input(&e).unwrap(), &choices.to_source(&e).unwrap(), 2).unwrap();
    assert_eq!(trace.steps, 2);
    assert!(trace.render().contains("aabb"), "{}", trace.render());
}

#[test]
fn stuck_fixtures_name_their_reason() {
    for (file, reason) in [("clash", "clash"), ("guard_undefined", "guard")] {
        let e = ema(load(&format!("ema/{file}.json")));
        let trace = run(&e, &Default::default(), &ChoiceSource::none(), 10).unwrap();
        match &trace.outcome {
            Outcome::Stuck(r) => assert!(r.to_string().contains(reason), "{file}: {r}"),
            other => panic!("{file}: {other}"),
        }
    }
}
