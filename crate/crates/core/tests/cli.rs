mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::manifest_path;
use serde_json::Value;

fn wfspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wfspec"))
        .args(args)
        .env_remove("WFSPEC_PATTERNS")
        .output()
        .unwrap()
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn without_stats(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("stats");
    v
}

fn model() -> String {
    manifest_path("models/insurance.wf").display().to_string()
}

#[test]
fn generate_writes_the_summed_specification() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("out.tl");
    let out = wfspec(&["generate", "--model", &model(), "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("UC2: 24 formulas"), "{stderr}");
    assert!(stderr.contains("UC3: 6 formulas"));
    let text = std::fs::read_to_string(&spec).unwrap();
    assert_eq!(text.lines().count(), 30);
}

#[test]
fn single_workflow_model() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.wf");
    std::fs::write(&m, "workflow UC3: Seq(Seq(k, l), d)\n").unwrap();
    let out = wfspec(&["generate", "--model", m.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 6);
}

#[test]
fn missing_pattern_file_is_an_error() {
    let out = wfspec(&[
        "generate",
        "--patterns",
        "/nonexistent/patterns.pat",
        "--model",
        &model(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("nonexistent"));
}

#[test]
fn pattern_path_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_wfspec"))
        .args(["generate", "--model", &model()])
        .env("WFSPEC_PATTERNS", "/nonexistent/env.pat")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn model_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("bad.wf");
    std::fs::write(&m, "# header\nworkflow W: Seq(a, Nope(b, c))\n").unwrap();
    let out = wfspec(&["generate", "--model", m.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("line 2"), "{stderr}");
}

#[test]
fn tautology_with_empty_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("empty.tl");
    std::fs::write(&spec, "").unwrap();
    let rep = dir.path().join("r.json");
    let out = wfspec(&[
        "verify",
        "--spec",
        spec.to_str().unwrap(),
        "--property",
        "p => p",
        "--report",
        rep.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&rep);
    assert_eq!(r["result"], "Proved");
    assert_eq!(r["mode"], "global");
    assert_eq!(r["premisesCount"], 0);
    for key in ["coneUsed", "property", "stats"] {
        assert!(r.get(key).is_some(), "{key}");
    }
    for key in ["states", "eliminated", "millis"] {
        assert!(r["stats"].get(key).is_some(), "{key}");
    }
    assert!(r.get("counterexample").is_none());
}

#[test]
fn refutation_uses_display_names() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.tl");
    std::fs::write(&spec, "[](g => <>i)\n").unwrap();
    let m = dir.path().join("m.wf");
    std::fs::write(
        &m,
        "atom g = \"RentVehicle\"\natom i = \"Warning\"\nworkflow W: Seq(g, i)\n",
    )
    .unwrap();
    let rep = dir.path().join("r.json");
    let out = wfspec(&[
        "verify",
        "--spec",
        spec.to_str().unwrap(),
        "--model",
        m.to_str().unwrap(),
        "--property",
        "<>g",
        "--mode",
        "local",
        "--report",
        rep.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&rep);
    assert_eq!(r["result"], "Refuted");
    let text = r["counterexample"]["text"].as_str().unwrap();
    assert!(text.starts_with("prefix: ["), "{text}");
    assert!(r["counterexample"]["loop"].is_array());
    let trace: wfspec::oracle::Trace = text.parse().unwrap_or_else(|_| panic!("{text}"));
    assert!(!trace.cycle().is_empty());
}

#[test]
fn property_file_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.tl");
    std::fs::write(&spec, "p\n").unwrap();
    let prop = dir.path().join("q.tl");
    std::fs::write(&prop, "# the property\n<>p\n").unwrap();
    let out = wfspec(&[
        "verify",
        "--spec",
        spec.to_str().unwrap(),
        "--property-file",
        prop.to_str().unwrap(),
        "--mode",
        "local",
    ]);
    assert_eq!(out.status.code(), Some(0));

    std::fs::write(&prop, "<>p\n<>q\n").unwrap();
    let out = wfspec(&[
        "verify",
        "--spec",
        spec.to_str().unwrap(),
        "--property-file",
        prop.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = wfspec(&["verify", "--spec", spec.to_str().unwrap(), "--property", "(p &"]);
    assert_eq!(out.status.code(), Some(2));

    let out = wfspec(&["verify", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = wfspec(&[
        "verify",
        "--spec",
        spec.to_str().unwrap(),
        "--property",
        "p",
        "--mode",
        "sometimes",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn budget_exhaustion_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.tl");
    std::fs::write(&spec, "[](a => <>b)\n[](b => <>c)\n<>a\n").unwrap();
    let out = wfspec(&[
        "verify",
        "--spec",
        spec.to_str().unwrap(),
        "--property",
        "<>c",
        "--max-states",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["result"], "ResourceLimit");
}

#[test]
fn generated_file_and_in_memory_generation_agree() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.tl");
    assert_eq!(
        wfspec(&["generate", "--model", &model(), "--spec", spec.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let via_file = dir.path().join("a.json");
    let in_memory = dir.path().join("b.json");
    let common = ["verify", "--property", "b => <>g", "--mode", "local", "--model"];
    let a = wfspec(
        &[
            &common[..],
            &[
                &model(),
                "--spec",
                spec.to_str().unwrap(),
                "--report",
                via_file.to_str().unwrap(),
            ],
        ]
        .concat(),
    );
    let b = wfspec(&[&common[..], &[&model(), "--report", in_memory.to_str().unwrap()]].concat());
    assert_eq!(a.status.code(), b.status.code());
    assert_eq!(without_stats(report(&via_file)), without_stats(report(&in_memory)));
}

#[test]
fn oracle_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.tl");
    std::fs::write(&spec, "<>a\n[]~a\n").unwrap();
    let out = wfspec(&["oracle", "--spec", spec.to_str().unwrap(), "--mode", "local"]);
    assert_eq!(out.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["result"], "NoneUpToBound");
    assert_eq!(r["boundsUsed"]["maxPrefix"], 6);

    std::fs::write(&spec, "a\na => <>b\n").unwrap();
    let out = wfspec(&["oracle", "--spec", spec.to_str().unwrap(), "--mode", "local"]);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["result"], "ModelFound");
    assert_eq!(r["trace"]["text"], "prefix: [] loop: [{a,b}]");

    std::fs::write(&spec, "a &&\n").unwrap();
    let out = wfspec(&["oracle", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
