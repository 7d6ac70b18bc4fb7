//! Acceptance criterion 12: identical seeds and configs give byte-identical
//! output regardless of thread count.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freegame"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_at_threads(threads: &str, args: &[&str]) -> Vec<u8> {
    let mut full = vec!["--threads", threads];
    full.extend_from_slice(args);
    let out = run(&full);
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

#[test]
fn criterion_12_reproducibility_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("g.json");
    let game = game.to_str().unwrap();
    let gen = run(&[
        "gen", "random", "--x", "5", "--y", "5", "--a", "3", "--b", "3", "--seed", "42", "--out",
        game,
    ]);
    assert!(gen.status.success());

    let cases: Vec<Vec<&str>> = vec![
        vec!["solve", "--game", game, "--exact"],
        vec!["solve", "--game", game, "--est", "0.2"],
        vec!["solve", "--game", game, "--rest", "0.2", "--seed", "7"],
        vec!["solve", "--game", game, "--subsample", "0.5", "--mc", "40", "--seed", "9"],
        vec!["experiment", "subsample", "--game", game, "--kappas", "1,2,3"],
        vec!["gen", "counterexample", "--n", "4"],
    ];
    let mut ok = true;
    for case in &cases {
        let one = stdout_at_threads("1", case);
        let four = stdout_at_threads("4", case);
        if one != four {
            ok = false;
            println!("  divergent output for {case:?}");
        }
    }
    println!(
        "criterion 12: {} - byte-identical output at 1 and 4 threads ({} cases)",
        if ok { "PASS" } else { "FAIL" },
        cases.len()
    );
    assert!(ok);
}
