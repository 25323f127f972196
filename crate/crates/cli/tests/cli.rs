use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn corpus(rel: &str) -> String {
    format!("{}/../../corpus/{rel}", env!("CARGO_MANIFEST_DIR"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn ema(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ema")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn compile(kind: &str, name: &str) -> String {
    let out = scratch(&format!("{kind}_{name}.ema.json"));
    let o = ema(&[
        "translate",
        "--from",
        kind,
        "--to",
        "ema",
        &corpus(&format!("{kind}/{name}.json")),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out.to_str().unwrap().to_owned()
}

#[test]
fn immediate_accept_runs_in_one_step() {
    let o = ema(&["run", &corpus("ema/immediate_accept.json")]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "t=0 status=go\nt=1 status=acc\noutcome=Accepted steps=1\n");
}

#[test]
fn outcomes_map_to_exit_codes() {
    assert_eq!(code(&ema(&["run", &corpus("ema/halted.json")])), 1);
    let stuck = ema(&["run", &corpus("ema/clash.json")]);
    assert_eq!(code(&stuck), 2);
    assert!(stdout(&stuck).ends_with("outcome=Stuck:clash(status) steps=0\n"));
    let guard = ema(&["run", &corpus("ema/guard_undefined.json")]);
    assert!(stdout(&guard).contains("Stuck:guard-undefined(0)"));
    let tm = corpus("tm/sort.json");
    let limited = ema(&["run", &tm, "--input", &corpus("input/aba.json"), "--max-steps", "2"]);
    assert_eq!(code(&limited), 3);
    assert!(stdout(&limited).ends_with("outcome=StepLimit steps=2\n"));
}

#[test]
fn trace_file_matches_stdout() {
    let out = scratch("flip.trace");
    let o = ema(&[
        "run",
        &corpus("tm/flip_first.json"),
        "--input",
        &corpus("input/ab.json"),
        "--trace",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(out).unwrap(), stdout(&o));
    assert!(stdout(&o).starts_with("t=0 status=go c1={0:a,1:b,*:_}"));
}

#[test]
fn seeded_runs_replay() {
    let g = compile("grammar", "anbn");
    let args = [
        "run",
        &g,
        "--input",
        &corpus("input/start.json"),
        "--seed",
        "42",
        "--external-bound",
        "4",
        "--max-steps",
        "8",
    ];
    let (a, b) = (ema(&args), ema(&args));
    assert_eq!(code(&a), 3);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn reachable_words_are_sorted() {
    let g = compile("grammar", "anbn");
    let o = ema(&["run", &g, "--input", &corpus("input/start.json"), "--reachable-depth", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "S\naSb\naaSbb\naabb\nab\n");
    let tm = compile("tm", "marker");
    let bad = ema(&["run", &tm, "--reachable-depth", "2"]);
    assert_eq!(code(&bad), 64);
}

#[test]
fn translation_is_deterministic_and_round_trips() {
    let golden = fs::read_to_string(corpus("ema/marker_wt.json")).unwrap();
    let compiled = fs::read_to_string(compile("tm", "marker")).unwrap();
    assert_eq!(compiled, golden);
    for name in ["flip_first", "anbn", "skip2"] {
        let e = compile("tm", name);
        let back = ema(&["translate", "--from", "ema", "--to", "tm", &e]);
        assert_eq!(code(&back), 0);
        let original: Value =
            serde_json::from_str(&fs::read_to_string(corpus(&format!("tm/{name}.json"))).unwrap()).unwrap();
        let again = scratch(&format!("{name}.back.json"));
        fs::write(&again, stdout(&back)).unwrap();
        let norm = ema(&["translate", "--from", "tm", "--to", "ema", again.to_str().unwrap()]);
        assert_eq!(stdout(&norm), fs::read_to_string(&e).unwrap(), "{name}");
        assert_eq!(original["kind"], "tm");
    }
}

#[test]
fn grammar_translation_declares_choose() {
    let o = ema(&["translate", "--from", "grammar", "--to", "ema", &corpus("grammar/anbn.json")]);
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["body"]["signature"]["external"][0]["name"], "Choose");
}

#[test]
fn non_class_translation_exits_four() {
    let o = ema(&["translate", "--from", "ema", "--to", "tm", &corpus("ema/immediate_accept.json")]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("(1)"), "{}", stderr(&o));
}

#[test]
fn check_reports() {
    let ok = ema(&["check", "--class", "wt", &corpus("ema/marker_wt.json")]);
    assert_eq!((code(&ok), stdout(&ok)), (0, "ok wt n=1 k=1 r=2 s=2\n".to_owned()));
    let tram = ema(&["check", "--class", "tram", &corpus("ema/marker_wt.json")]);
    assert_eq!(code(&tram), 4);
    let text = stdout(&tram);
    assert!(text.starts_with("not tram\n(1) ") && text.contains("\n(2) "), "{text}");

    let g = compile("grammar", "anbn");
    let mut doc: Value = serde_json::from_str(&fs::read_to_string(&g).unwrap()).unwrap();
    doc["body"]["signature"]["dynamic"] = json!([{"name": "extra", "args": [], "results": [1]}]);
    doc["body"]["initials"] = json!({"extra": {"element": 0}});
    for f in doc["body"]["functionals"].as_array_mut().unwrap() {
        f["tables"].as_array_mut().unwrap().push(json!({"symbol": "extra", "rows": [{"pattern": "", "updates": []}]}));
    }
    let path = scratch("gra_dynamic.json");
    fs::write(&path, doc.to_string()).unwrap();
    let o = ema(&["check", "--class", "gra", path.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    assert!(stdout(&o).contains("(3) "), "{}", stdout(&o));
}

#[test]
fn compare_agrees_on_compiled_machines() {
    let m = corpus("tm/anbn.json");
    let e = compile("tm", "anbn");
    let o = ema(&["compare", "--machine", &m, "--ema", &e, "--input", &corpus("input/aabb.json")]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "equivalent for 5 steps\noutcome=Accepted\n");
    let zero =
        ema(&["compare", "--machine", &m, "--ema", &e, "--input", &corpus("input/aabb.json"), "--max-steps", "0"]);
    assert_eq!(stdout(&zero), "equivalent for 0 steps\noutcome=StepLimit\n");

    let t = corpus("tram/fixpoint.json");
    let te = compile("tram", "fixpoint");
    let o = ema(&["compare", "--machine", &t, "--ema", &te, "--input", &corpus("input/mem_fix.json")]);
    assert_eq!(stdout(&o), "equivalent for 1 steps\noutcome=Accepted\n");

    let g = compile("grammar", "anbn");
    let args =
        ["compare", "--machine", &corpus("grammar/anbn.json"), "--ema", &g, "--input", &corpus("input/start.json")];
    assert_eq!(code(&ema(&args)), 64);
    let choices = corpus("input/derive_aabb.json");
    let o = ema(&[&args[..], &["--choices", &choices]].concat());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

/// Wraps every head move of the compiled marker machine in one more `Succ1`.
#[test]
fn compare_reports_an_extra_move() {
    let mut doc: Value = serde_json::from_str(&fs::read_to_string(corpus("ema/marker_wt.json")).unwrap()).unwrap();
    for table in doc["body"]["functionals"][0]["tables"].as_array_mut().unwrap() {
        if table["symbol"] == "pos1" {
            for row in table["rows"].as_array_mut().unwrap() {
                for u in row["updates"].as_array_mut().unwrap() {
                    let old = u["value"].take();
                    u["value"] = json!({"head": "Succ1", "args": [old]});
                }
            }
        }
    }
    let path = scratch("marker_extra_move.json");
    fs::write(&path, doc.to_string()).unwrap();
    let o = ema(&[
        "compare",
        "--machine",
        &corpus("tm/marker.json"),
        "--ema",
        path.to_str().unwrap(),
        "--input",
        &corpus("input/xx.json"),
    ]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("diverge at t=1\n"), "{}", stdout(&o));
}

#[test]
fn usage_and_file_errors() {
    assert_eq!(code(&ema(&["run"])), 64);
    assert_eq!(code(&ema(&["frobnicate"])), 64);
    assert_eq!(code(&ema(&["translate", "--from", "tm", "--to", "tram", &corpus("tm/sort.json")])), 64);
    assert_eq!(code(&ema(&["run", "/nonexistent/machine.json"])), 66);
    let bad = scratch("bad.json");
    fs::write(&bad, r#"{"kind": "ema", "version": "1", "body": {}, "extra": true}"#).unwrap();
    let o = ema(&["run", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 65);
    assert!(stderr(&o).contains("extra"));
    let wrong = ema(&["check", "--class", "wt", &corpus("tm/sort.json")]);
    assert_eq!(code(&wrong), 65);
    assert!(stderr(&wrong).contains("expected a ema document"), "{}", stderr(&wrong));
    assert_eq!(code(&ema(&["--help"])), 0);
}
