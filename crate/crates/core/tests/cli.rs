//! End-to-end tests of the binary: argument handling, exit codes, output
//! formats, and reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_credal-lln"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf8 stdout")
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("utf8 stderr")
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&["bound", "--help"]).status.code(), Some(0));
}

#[test]
fn parse_errors_exit_two() {
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["bound"]).status.code(), Some(2)); // missing --formula
    assert_eq!(
        run(&["bound", "--formula", "thm1", "--eps", "nope"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn domain_errors_exit_two_with_message() {
    let o = run(&[
        "bound",
        "--formula",
        "thm1",
        "--eps",
        "-1",
        "--bmax",
        "1",
        "--n",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("error:"), "stderr: {}", stderr(&o));

    let o = run(&["bound", "--formula", "unknown-formula", "--eps", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("unknown formula"),
        "stderr: {}",
        stderr(&o)
    );

    // Missing required value for the chosen formula.
    let o = run(&["bound", "--formula", "markov", "--eps", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("--expectation"),
        "stderr: {}",
        stderr(&o)
    );
}

#[test]
fn bound_evaluates_known_values() {
    let o = run(&[
        "bound",
        "--formula",
        "thm1",
        "--eps",
        "2.5",
        "--bmax",
        "1",
        "--n",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("value: 0.2865047968601901"), "{s}");

    // Explicit --b list agrees with the uniform form.
    let o2 = run(&[
        "bound",
        "--formula",
        "thm1",
        "--eps",
        "2.5",
        "--b",
        "1,1,1,1,1,1,1,1,1,1",
    ]);
    assert_eq!(stdout(&o2), s);

    let o = run(&[
        "bound",
        "--formula",
        "thm4-slln-N",
        "--eps",
        "0.1",
        "--sigma2",
        "1",
        "--delta",
        "0.5",
    ]);
    assert!(stdout(&o).contains("threshold: 1251"), "{}", stdout(&o));
}

#[test]
fn bound_json_carries_provenance() {
    let o = run(&[
        "bound",
        "--formula",
        "khr",
        "--moments",
        "0.25,0.25",
        "--eps-list",
        "1,2",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).expect("valid json");
    assert_eq!(v["provenance"]["tool"], "credal-lln");
    assert!(v["provenance"]["command"].as_str().unwrap().contains("khr"));
    assert_eq!(v["report"]["formula_id"], "khr");
    assert_eq!(v["report"]["value"], 0.6875);
}

#[test]
fn simulate_is_reproducible_and_worker_independent() {
    let args = [
        "simulate",
        "--spec",
        "binary",
        "--n",
        "8",
        "--trials",
        "5",
        "--seed",
        "42",
        "--strategy",
        "SIGN_SWITCH",
    ];
    let a = run(&args);
    assert_eq!(a.status.code(), Some(0));
    let mut with_workers = args.to_vec();
    with_workers.extend_from_slice(&["--workers", "3"]);
    let b = run(&with_workers);
    assert_eq!(stdout(&a), stdout(&b), "draws must not depend on --workers");

    let header = stdout(&a);
    let mut lines = header.lines();
    assert_eq!(lines.next(), Some("strategy,trial,step,x,m,y"));
    assert_eq!(header.lines().count(), 1 + 5 * 8);
}

#[test]
fn verify_passes_a_true_bound_and_is_byte_stable() {
    let args = [
        "verify",
        "--spec",
        "binary",
        "--n",
        "10",
        "--formula",
        "thm1",
        "--eps",
        "2.5",
        "--trials",
        "5000",
        "--seed",
        "7",
    ];
    let a = run(&args);
    assert_eq!(a.status.code(), Some(0), "stderr: {}", stderr(&a));
    let s = stdout(&a);
    assert!(s.starts_with("strategy,formula,side,event,"), "{s}");
    assert!(s.contains("PASS"), "{s}");
    assert!(!s.contains("FAIL"), "{s}");

    let b = run(&args);
    assert_eq!(stdout(&a), stdout(&b), "same seed must give identical CSV");

    let mut with_workers = args.to_vec();
    with_workers.extend_from_slice(&["--workers", "4"]);
    let c = run(&with_workers);
    assert_eq!(stdout(&a), stdout(&c), "CSV must not depend on --workers");
}

#[test]
fn verify_writes_csv_artifact_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ledger.csv");
    let o = run(&[
        "verify",
        "--spec",
        "binary",
        "--n",
        "10",
        "--formula",
        "thm3-wlln",
        "--eps",
        "0.25",
        "--trials",
        "2000",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "stderr: {}", stderr(&o));
    assert!(stdout(&o).contains("thm3-wlln"), "{}", stdout(&o));
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.contains("MEAN_BAND(0.25)"), "{csv}");
}

#[test]
fn verify_slln_window_and_json() {
    let o = run(&[
        "verify",
        "--spec",
        "binary",
        "--n",
        "12",
        "--formula",
        "thm3-slln-N",
        "--eps",
        "0.45",
        "--window-start",
        "5",
        "--window-len",
        "3",
        "--trials",
        "2000",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0), "stderr: {}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).expect("valid json");
    assert_eq!(v["record"]["report"]["formula_id"], "thm3-slln-N");
    assert_eq!(v["record"]["verdict"], "PASS");

    // A window starting before the threshold is rejected as inconsistent.
    let o = run(&[
        "verify",
        "--spec",
        "binary",
        "--n",
        "12",
        "--formula",
        "thm3-slln-N",
        "--eps",
        "0.45",
        "--window-start",
        "2",
        "--window-len",
        "3",
        "--trials",
        "100",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("threshold"), "{}", stderr(&o));
}

#[test]
fn verify_rejects_mgf_formula() {
    let o = run(&[
        "verify",
        "--spec",
        "binary",
        "--formula",
        "hoeffding-mgf",
        "--eps",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("moment generating function"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn verify_markov_uses_spec_expectation() {
    // binary spec upper mean 0.7/step; eps must exceed n * 0.7.
    let o = run(&[
        "verify",
        "--spec",
        "binary",
        "--n",
        "10",
        "--formula",
        "markov",
        "--eps",
        "9.5",
        "--trials",
        "3000",
    ]);
    assert_eq!(o.status.code(), Some(0), "stderr: {}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("markov"), "{s}");

    // binary-pm1 has negative support: refused.
    let o = run(&[
        "verify",
        "--spec",
        "binary-pm1",
        "--n",
        "10",
        "--formula",
        "markov",
        "--eps",
        "9.5",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("non-negative"), "{}", stderr(&o));
}

#[test]
fn verify_accepts_spec_files_both_forms() {
    let dir = tempfile::tempdir().unwrap();
    let compact = dir.path().join("compact.json");
    std::fs::write(
        &compact,
        r#"{"horizon": 6, "step": {"credal": {"values": [0.0, 1.0],
            "extremes": [[0.5, 0.5], [0.3, 0.7]]}}}"#,
    )
    .unwrap();
    let o = run(&[
        "verify",
        "--spec",
        compact.to_str().unwrap(),
        "--formula",
        "thm1",
        "--eps",
        "2.0",
        "--trials",
        "1000",
    ]);
    assert_eq!(o.status.code(), Some(0), "stderr: {}", stderr(&o));

    // --n together with a file is an error.
    let o = run(&[
        "verify",
        "--spec",
        compact.to_str().unwrap(),
        "--n",
        "5",
        "--formula",
        "thm1",
        "--eps",
        "2.0",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("horizon"), "{}", stderr(&o));
}

#[test]
fn moment_spec_runs_unbounded_strategies() {
    let o = run(&[
        "verify",
        "--spec",
        "moment",
        "--n",
        "30",
        "--formula",
        "thm4-wlln",
        "--eps",
        "0.5",
        "--trials",
        "4000",
    ]);
    assert_eq!(o.status.code(), Some(0), "stderr: {}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("TWO_POINT"), "{s}");
    assert!(s.contains("GAUSS"), "{s}");
    assert!(!s.contains("FAIL"), "{s}");
}

#[test]
fn example1_reports_the_stuck_envelope_and_gap() {
    let o = run(&[
        "example1",
        "--delta",
        "0.3",
        "--eps",
        "0.1",
        "--n",
        "1,100,10000",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("10000,1,0.7,1,0.7"), "{s}");
    assert!(s.contains("holds=false"), "{s}");
    assert!(s.contains("holds=true"), "{s}");

    let o = run(&["example1", "--json", "--no-gap"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).expect("valid json");
    assert!(v["coverage"].as_array().unwrap().len() >= 3);
    assert!(v.get("gap").is_none());

    let o = run(&["example1", "--delta", "0.3", "--eps", "0.9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_passes_clean_and_fails_biased() {
    let o = run(&["check", "--spec", "ternary", "--n", "5"]);
    assert_eq!(o.status.code(), Some(0), "stderr: {}", stderr(&o));
    assert!(stdout(&o).contains("all: PASS"), "{}", stdout(&o));

    let o = run(&[
        "check", "--spec", "ternary", "--n", "5", "--bias", "0.25", "--json",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).expect("valid json");
    assert_eq!(v["all_passed"], false);
    assert_eq!(v["bias"], 0.25);
}

#[test]
fn strategies_lists_the_builtin_names() {
    let o = run(&["strategies"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    for name in ["GREEDY_UP", "SIGN_SWITCH", "HASH_MIX(salt)", "GAUSS"] {
        assert!(s.lines().any(|l| l == name), "missing {name} in {s}");
    }
}

#[test]
fn unknown_strategy_is_a_usage_error() {
    let o = run(&[
        "simulate",
        "--spec",
        "binary",
        "--n",
        "4",
        "--strategy",
        "NOT_A_STRATEGY",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown strategy"), "{}", stderr(&o));
}

#[test]
fn artifacts_do_not_leak_on_error() {
    // A failing run must not half-write the artifact.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("never.csv");
    let o = run(&[
        "verify",
        "--spec",
        "binary",
        "--n",
        "10",
        "--formula",
        "thm1",
        "--eps",
        "-2.0",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!Path::new(&path).exists());
}
