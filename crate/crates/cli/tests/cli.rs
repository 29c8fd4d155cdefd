use std::path::Path;

use serde_json::{json, Value};
use zdistill_cli::{run, EXIT_BAD_INPUT, EXIT_INVALID_PLAN, EXIT_OK, EXIT_VERIFY_FAILED};

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn zdistill(args: &[&str]) -> Outcome {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("zdistill").chain(args.iter().copied()), &mut out, &mut err);
    Outcome { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn state(id: &str, k: usize, n: usize, origin: &str) -> Value {
    json!({"id": id, "k": k, "n": n, "origin": origin})
}

fn single_cycle_doc(k_left: usize, k_right: usize) -> Value {
    json!({
        "schema_version": 1,
        "k": 1,
        "target_n": 6,
        "mode": "explicit",
        "plan": {
            "k": 1,
            "inputs": [state("A", k_left, 3, "input"), state("B", k_right, 5, "input")],
            "ancillas": [],
            "cycles": [{"left": state("A", k_left, 3, "input"), "right": state("B", k_right, 5, "input"), "produced": "C"}],
            "target": {"k": 1, "n": 6}
        },
        "verification": {"verify_with_oracle": false}
    })
}

#[test]
fn run_exact_plan_reports_exact_fraction() {
    let dir = tempfile::tempdir().unwrap();
    let plan = zdistill(&["plan", "exact", "--k", "1", "--n1", "3", "--n2", "3"]);
    assert_eq!(plan.code, EXIT_OK);
    let path = write(dir.path(), "exact.json", &plan.stdout);
    let r = zdistill(&["run", &path]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(r.stdout.trim_end().ends_with("Z_1(6)"));
    assert!(r.stdout.contains("cumulative success probability: 1/24 (approx. 0.0416667)"));
}

#[test]
fn json_report_carries_fractions_only() {
    let dir = tempfile::tempdir().unwrap();
    let plan = zdistill(&["plan", "incremental", "--k", "1", "--n", "6"]);
    let path = write(dir.path(), "inc.json", &plan.stdout);
    let r = zdistill(&["run", &path, "--report", "json", "--verify-with-oracle"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["cycles"].as_array().unwrap().len(), 3);
    assert_eq!(v["final_descriptor"], "Z_1(6)");
    assert_eq!(v["cumulative_probability"], json!({"num": 1, "den": 108}));
    assert!(v["cycles"].as_array().unwrap().iter().all(|c| c["oracle_checked"] == true));
    assert!(!r.stdout.contains("approx"));
}

#[test]
fn k_mismatch_is_an_invalid_plan() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bad.json", &single_cycle_doc(1, 2).to_string());
    for cmd in ["run", "graph"] {
        let r = zdistill(&[cmd, &path]);
        assert_eq!(r.code, EXIT_INVALID_PLAN, "{cmd}: {}", r.stderr);
        assert!(r.stderr.contains("k mismatch"), "{}", r.stderr);
    }
}

#[test]
fn malformed_documents_are_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let mut extra = single_cycle_doc(1, 1);
    extra["colour"] = json!("blue");
    let mut version = single_cycle_doc(1, 1);
    version["schema_version"] = json!(7);
    let cases = [
        write(dir.path(), "garbage.json", "{ not json"),
        write(dir.path(), "extra.json", &extra.to_string()),
        write(dir.path(), "version.json", &version.to_string()),
        dir.path().join("missing.json").to_str().unwrap().to_owned(),
    ];
    for path in &cases {
        let r = zdistill(&["run", path]);
        assert_eq!(r.code, EXIT_BAD_INPUT, "{path}: {}", r.stderr);
    }
    assert_eq!(zdistill(&["run"]).code, EXIT_BAD_INPUT);
    assert_eq!(zdistill(&["frobnicate"]).code, EXIT_BAD_INPUT);
}

#[test]
fn valid_explicit_document_runs() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "ok.json", &single_cycle_doc(1, 1).to_string());
    let r = zdistill(&["run", &path, "--verify-with-oracle"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(r.stdout.contains("p = 1/5 "));
}

#[test]
fn dense_cap_above_maximum_is_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "ok.json", &single_cycle_doc(1, 1).to_string());
    assert_eq!(zdistill(&["run", &path, "--dense-cap", "64"]).code, EXIT_BAD_INPUT);
    assert_eq!(zdistill(&["verify", "--dense-cap", "64"]).code, EXIT_BAD_INPUT);
}

#[test]
fn verify_bounds_and_negative_control() {
    let r = zdistill(&["verify", "--max-n", "23"]);
    assert_eq!(r.code, EXIT_BAD_INPUT);
    assert!(r.stderr.contains("exceeds the dense cap"));

    let small = zdistill(&["verify", "--max-n", "8", "--max-k", "2"]);
    assert_eq!(small.code, EXIT_OK, "{}", small.stdout);

    let corrupt = zdistill(&["verify", "--max-n", "8", "--max-k", "2", "--corrupt-alpha"]);
    assert_eq!(corrupt.code, EXIT_VERIFY_FAILED);
    assert!(corrupt.stdout.contains("FAIL distillation"));
    assert!(corrupt.stderr.contains("k=2"), "{}", corrupt.stderr);
}

#[test]
fn plan_examples() {
    let exp: Value =
        serde_json::from_str(&zdistill(&["plan", "exponential", "--k", "1", "--n", "10"]).stdout).unwrap();
    assert_eq!(exp["plan"]["cycles"].as_array().unwrap().len(), 7);

    let exact: Value =
        serde_json::from_str(&zdistill(&["plan", "exact", "--k", "2", "--n1", "5", "--n2", "6"]).stdout)
            .unwrap();
    assert_eq!(exact["target_n"], 11);
    assert_eq!(exact["plan"]["ancillas"], json!([state("ancilla", 2, 8, "ancilla")]));

    let empty: Value =
        serde_json::from_str(&zdistill(&["plan", "incremental", "--k", "1", "--n", "3"]).stdout).unwrap();
    assert_eq!(empty["plan"]["cycles"], json!([]));
}

#[test]
fn plan_precondition_violations_are_bad_input() {
    for args in [
        &["plan", "incremental", "--k", "2", "--n", "4"][..],
        &["plan", "exponential", "--k", "0", "--n", "4"],
        &["plan", "exact", "--k", "2", "--n1", "3", "--n2", "6"],
        &["plan", "exact", "--k", "1", "--n1", "3"],
        &["plan", "exact", "--k", "1", "--n1", "3", "--n2", "3", "--n", "7"],
        &["plan", "incremental", "--k", "1"],
        &["plan", "incremental", "--k", "1", "--n", "5", "--n1", "3"],
    ] {
        let r = zdistill(args);
        assert_eq!(r.code, EXIT_BAD_INPUT, "{args:?}");
        assert!(r.stdout.is_empty());
    }
}

#[test]
fn graph_matches_plan_shape_and_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let single = write(dir.path(), "single.json", &single_cycle_doc(1, 1).to_string());
    let dot = zdistill(&["graph", &single]).stdout;
    assert_eq!(dot.matches("shape=box").count(), 3);
    assert_eq!(dot.matches("shape=rarrow").count(), 1);
    assert_eq!(zdistill(&["graph", &single]).stdout, dot);

    let exact = write(
        dir.path(),
        "exact.json",
        &zdistill(&["plan", "exact", "--k", "1", "--n1", "3", "--n2", "3"]).stdout,
    );
    let dot = zdistill(&["graph", &exact]).stdout;
    assert_eq!(dot.matches("shape=box").count(), 5);
    assert_eq!(dot.matches("shape=rarrow").count(), 2);
    assert!(dot.contains("consume 2"));

    let empty =
        write(dir.path(), "empty.json", &zdistill(&["plan", "incremental", "--k", "2", "--n", "5"]).stdout);
    let dot = zdistill(&["graph", &empty]).stdout;
    assert_eq!(dot.matches("shape=box").count(), 1);
    assert_eq!(dot.matches("shape=rarrow").count(), 0);
}

#[test]
fn generated_documents_run_for_every_mode() {
    let dir = tempfile::tempdir().unwrap();
    for k in 1..=3usize {
        for n in 2 * k + 1..=20 {
            let mut docs = vec![
                zdistill(&["plan", "incremental", "--k", &k.to_string(), "--n", &n.to_string()]),
                zdistill(&["plan", "exponential", "--k", &k.to_string(), "--n", &n.to_string()]),
            ];
            let n1 = n / 2;
            if n1 >= 2 * k && n - n1 >= 2 * k {
                docs.push(zdistill(&[
                    "plan",
                    "exact",
                    "--k",
                    &k.to_string(),
                    "--n1",
                    &n1.to_string(),
                    "--n2",
                    &(n - n1).to_string(),
                ]));
            }
            for (i, doc) in docs.iter().enumerate() {
                assert_eq!(doc.code, EXIT_OK, "k={k} n={n}: {}", doc.stderr);
                let path = write(dir.path(), &format!("{k}_{n}_{i}.json"), &doc.stdout);
                let r = zdistill(&["run", &path]);
                assert_eq!(r.code, EXIT_OK, "k={k} n={n} doc {i}: {}", r.stderr);
                assert!(r.stdout.trim_end().ends_with(&format!("final state: Z_{k}({n})")));
            }
        }
    }
}

#[test]
fn help_goes_to_stdout() {
    let r = zdistill(&["--help"]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.stdout.contains("verify"));
    assert!(!r.stdout.contains("corrupt-alpha"));
}
