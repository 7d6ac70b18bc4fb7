use std::io::Write as _;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_freegame"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.as_mut().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

const DIMACS: &str = "p cnf 3 3\n1 2 3 0\n-1 -2 -3 0\n1 -2 3 0\n";

#[test]
fn gen_solve_pipeline_via_stdin() {
    let gen = run(&["gen", "counterexample", "--n", "3"]);
    assert!(gen.status.success());
    let solve = run_stdin(&["solve", "--game", "-", "--exact"], &gen.stdout);
    assert!(solve.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&solve.stdout).unwrap();
    assert_eq!(doc["report"]["value"], 2.0 / 3.0);
    assert_eq!(doc["schema_version"], 1);
}

#[test]
fn decide_gap_exit_codes() {
    let gen = run(&["gen", "counterexample", "--n", "3"]);
    let below = run_stdin(&["solve", "--game", "-", "--decide-gap", "0.2"], &gen.stdout);
    assert_eq!(below.status.code(), Some(1));

    // A verifier that always accepts has value 1.
    let one = run(&["gen", "random", "--x", "2", "--y", "2", "--a", "2", "--b", "2", "--seed", "1", "--boolean", "1.0"]);
    let value_one = run_stdin(&["solve", "--game", "-", "--decide-gap", "0.2"], &one.stdout);
    assert_eq!(value_one.status.code(), Some(0));
}

#[test]
fn budget_and_usage_exit_codes() {
    let gen = run(&["gen", "counterexample", "--n", "4"]);
    let tight = run_stdin(&["solve", "--game", "-", "--est", "0.2", "--budget", "3"], &gen.stdout);
    assert_eq!(tight.status.code(), Some(65));

    let usage = run(&["solve", "--no-such-flag"]);
    assert_eq!(usage.status.code(), Some(64));

    let two_methods = run_stdin(
        &["solve", "--game", "-", "--exact", "--est", "0.2"],
        &gen.stdout,
    );
    assert_eq!(two_methods.status.code(), Some(2));
}

#[test]
fn env_var_sets_default_budget() {
    let gen = run(&["gen", "counterexample", "--n", "4"]);
    let mut child = bin()
        .args(["solve", "--game", "-", "--est", "0.2"])
        .env("FREEGAME_BUDGET", "3")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.as_mut().unwrap().write_all(&gen.stdout).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(65));
}

#[test]
fn dimacs_to_birthday_to_value() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("f.cnf");
    std::fs::write(&cnf, DIMACS).unwrap();
    let gen = run(&["gen", "birthday", "--dimacs", cnf.to_str().unwrap(), "--k", "2", "--ell", "2"]);
    assert!(gen.status.success());
    let solve = run_stdin(&["solve", "--game", "-", "--exact"], &gen.stdout);
    assert!(solve.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&solve.stdout).unwrap();
    // The formula is satisfiable, so the birthday game has value 1.
    assert_eq!(doc["report"]["value"], 1.0);
}

#[test]
fn convert_game_to_csp_preserves_value() {
    let gen = run(&["gen", "random", "--x", "2", "--y", "3", "--a", "2", "--b", "2", "--seed", "5"]);
    let solve = run_stdin(&["solve", "--game", "-", "--exact"], &gen.stdout);
    let game_doc: serde_json::Value = serde_json::from_slice(&solve.stdout).unwrap();
    let csp = run_stdin(&["convert", "game-to-csp", "--game", "-"], &gen.stdout);
    assert!(csp.status.success());
    let sat = run_stdin(&["csp", "sat", "--csp", "-"], &csp.stdout);
    let sat_doc: serde_json::Value = serde_json::from_slice(&sat.stdout).unwrap();
    let v1 = game_doc["report"]["value"].as_f64().unwrap();
    let v2 = sat_doc["report"]["value"].as_f64().unwrap();
    assert!((v1 - v2).abs() <= 1e-9, "{v1} vs {v2}");
}

#[test]
fn experiment_csv_output() {
    let gen = run(&["gen", "random", "--x", "3", "--y", "3", "--a", "2", "--b", "2", "--seed", "2"]);
    let csv = run_stdin(
        &["experiment", "subsample", "--game", "-", "--kappas", "1,2,3"],
        &gen.stdout,
    );
    assert!(csv.status.success());
    let text = String::from_utf8(csv.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,mean,omega,upper_gap"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn version_prints_schema() {
    let out = run(&["--version"]);
    assert!(out.status.success());
}
