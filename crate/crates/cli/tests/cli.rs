use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn dvkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dvkit")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.push("--json");
    let o = dvkit(&a);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn schema() -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schema/report.schema.json");
    let s: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&s).unwrap()
}

const SMALL: &[&str] = &["--n", "4", "--grid", "rationals:40,matched:4,negatives:10"];

#[test]
fn analyze_text_is_line_stable() {
    let o = dvkit(&["analyze", "R3-abs"]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "command: analyze\nstatus: Decomposable\naxioms_used: []\ndual_dim: 2\nisotropic: Span((0,1,1))\n\
         characteristic: Span((1,0,0), (0,1,0)) (+) Span((0,1,1))\ndecomposability: Decomposable\n"
    );
}

#[test]
fn reports_validate_against_schema() {
    let v = schema();
    let runs: Vec<Vec<&str>> = vec![
        vec!["analyze", "V2-delta"],
        vec!["analyze", "W-nondecomposable", "--axiom", "A"],
        vec!["check-sum", "R3-abs", "e1,e2", "e3"],
        vec!["complement", "gamma-pair", "e1", "--axiom", "A"],
        vec!["kernel-image", "R3-abs", "[[1,0,0],[0,1,0],[0,0,0]]"],
        vec!["franklin", "--n", "3"],
        vec!["scenario", "gamma-pair"],
        vec!["list"],
        [&["verify-identity"], SMALL].concat(),
        [&["line-witness", "V2-delta", "(1,2)", "--witness", "builtin"], SMALL].concat(),
        [&["scenario"], SMALL].concat(),
    ];
    for args in runs {
        let r = json(&args);
        let errors: Vec<String> = v.iter_errors(&r).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}");
    }
    let bad = serde_json::json!({"command": "analyze", "status": "Maybe"});
    assert!(!v.is_valid(&bad));
}

#[test]
fn exit_codes() {
    assert_eq!(dvkit(&["analyze", "no-such-space"]).status.code(), Some(2));
    assert_eq!(dvkit(&["check-sum", "R3-abs", "(1,2)", "e3"]).status.code(), Some(2));
    assert_eq!(dvkit(&["check-sum", "R3-abs", "e4", "e3"]).status.code(), Some(2));
    assert_eq!(dvkit(&["analyze", "R3-abs", "--axiom", "B"]).status.code(), Some(2));
    assert_eq!(dvkit(&["kernel-image", "R3-abs", "[[1,0],[0"]).status.code(), Some(2));
    assert_eq!(dvkit(&["franklin", "--n", "0"]).status.code(), Some(2));
    // unknown verdicts are not failures
    let o = dvkit(&["analyze", "W-nondecomposable"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("status: Unknown"));
}

#[test]
fn space_and_witness_files() {
    let dir = tempfile::tempdir().unwrap();
    let space = dir.path().join("v.space");
    std::fs::write(&space, "# same as V2-delta\nspace V dim 2\ngen abs(x),abs(x)\ngen 0,deltaQ(x)\n").unwrap();
    let sp = space.to_str().unwrap();
    let r = json(&["analyze", sp]);
    assert_eq!(r["result"]["dual_dim"], 0);

    let good = dir.path().join("good.wit");
    std::fs::write(&good, "derived twice = 2*abs(x), 2*abs(x)\nterm 2 | g1 | x\ntail 0, 0\n").unwrap();
    let o = dvkit(&["check-sum", sp, "(1,1)", "e2", "--witness", good.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let bad = dir.path().join("bad.wit");
    std::fs::write(&bad, "derived lie = abs(x), 0\nterm 1 | g1 | x\ntail 0, 0\n").unwrap();
    let mut args = vec!["check-sum", sp, "e1", "e2", "--witness", bad.to_str().unwrap()];
    args.extend_from_slice(SMALL);
    let o = dvkit(&args);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lie"));

    let broken = dir.path().join("broken.wit");
    std::fs::write(&broken, "term 1 | g1 | x\n").unwrap();
    assert_eq!(dvkit(&["check-sum", sp, "e1", "e2", "--witness", broken.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(dvkit(&["check-sum", sp, "e1", "e2", "--witness", "/nonexistent"]).status.code(), Some(2));
}

#[test]
fn digest_tracks_inputs_and_timing_is_opt_in() {
    let a = json(&["analyze", "R3-abs"]);
    let b = json(&["analyze", "R3-abs"]);
    assert_eq!(a, b);
    assert!(a.get("timing_ms").is_none());
    let c = json(&["analyze", "R3-abs", "--axiom", "A"]);
    assert_ne!(a["inputs_digest"], c["inputs_digest"]);
    let t = json(&["analyze", "R3-abs", "--timing"]);
    assert!(t["timing_ms"].is_u64());
    assert_eq!(t["inputs_digest"], a["inputs_digest"]);
}

#[test]
fn conditional_verdicts_carry_axioms() {
    let r = json(&["analyze", "W-nondecomposable", "--axiom", "A"]);
    assert_eq!(r["status"], "NonDecomposable");
    assert_eq!(r["axioms_used"], serde_json::json!(["A"]));
    assert_eq!(r["result"]["decomposability"]["conditional"], true);
    let r = json(&["complement", "sqrt-delta", "e1", "--axiom", "axiom:sqrt-implication"]);
    assert_eq!(r["status"], "NotComplemented");
    assert_eq!(r["axioms_used"], serde_json::json!(["sqrt-implication"]));
    let r = json(&["complement", "sqrt-delta", "e1"]);
    assert_eq!(r["status"], "Unknown");
}

#[test]
fn franklin_and_identity() {
    let r = json(&["franklin", "--n", "6"]);
    assert_eq!(r["result"]["pairs"].as_array().unwrap().len(), 6);
    let mut args = vec!["verify-identity"];
    args.extend_from_slice(SMALL);
    let r = json(&args);
    assert_eq!(r["result"]["failures"], 0);
    assert_eq!(r["result"]["identity"]["checked"], 54);
}
