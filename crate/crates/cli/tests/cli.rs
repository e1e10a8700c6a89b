use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

fn aqd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aqd")).args(args).output().expect("binary runs")
}

fn aqd_with_input(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_aqd"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("bad json ({e}): {}", stdout(o)))
}

fn build_pair(dir: &Path, s: usize, k: usize, m: usize) -> (PathBuf, PathBuf) {
    let mut paths = Vec::new();
    for role in ["T1", "T2"] {
        let path = dir.join(format!("{role}.json"));
        let (s, k, m) = (s.to_string(), k.to_string(), m.to_string());
        let o =
            aqd(&["tree", "build", "--role", role, "--s", &s, "--k", &k, "--m", &m, "--out", path.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        paths.push(path);
    }
    (paths.remove(0), paths.remove(0))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn tree_build_writes_json_and_dot() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("t.json");
    let dot = dir.path().join("t.dot");
    let o = aqd(&[
        "--json",
        "tree",
        "build",
        "--role",
        "T1",
        "--s",
        "1",
        "--k",
        "1",
        "--m",
        "1",
        "--out",
        p(&out),
        "--dot",
        p(&dot),
    ]);
    assert!(o.status.success());
    assert_eq!(json(&o)["nodes"], 5);
    let tree: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(tree["nodes"].as_array().unwrap().len(), 5);
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("digraph"));
}

#[test]
fn tree_build_to_stdout() {
    let o = aqd(&["tree", "build", "--role", "T2", "--s", "1", "--k", "1", "--m", "1"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["nodes"].as_array().unwrap().len(), 4);
}

#[test]
fn parameter_errors_exit_with_two() {
    let o = aqd(&["tree", "build", "--role", "T1", "--s", "2", "--k", "1", "--m", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("m must be at least"));
    assert_eq!(aqd(&["tree", "build", "--role", "T3", "--s", "1", "--k", "1", "--m", "1"]).status.code(), Some(2));
    assert_eq!(aqd(&["formula", "qd", "--formula", "E x ."]).status.code(), Some(2));
    assert_eq!(aqd(&["verify", "construction", "--s", "1"]).status.code(), Some(2));
}

#[test]
fn property_evaluation_splits_the_pair() {
    let dir = TempDir::new().unwrap();
    let (t1, t2) = build_pair(dir.path(), 2, 1, 2);
    assert_eq!(stdout(&aqd(&["prop", "eval", "--tree", p(&t1), "--i", "2"])).trim(), "true");
    assert_eq!(stdout(&aqd(&["prop", "eval", "--tree", p(&t2), "--i", "2"])).trim(), "false");
    let o = aqd(&["--json", "prop", "eval", "--tree", p(&t1), "--i", "0", "--vertex", "1"]);
    assert_eq!(json(&o)["vertex"], 1);
    assert_eq!(aqd(&["prop", "eval", "--tree", p(&t1), "--i", "0", "--vertex", "999"]).status.code(), Some(2));
}

#[test]
fn formula_metrics_and_evaluation() {
    let f = "E x . E y . (pi(y) = x & A z . (pi(z) = x -> z = y))";
    assert_eq!(stdout(&aqd(&["formula", "qd", "--formula", f])).trim(), "3");
    assert_eq!(stdout(&aqd(&["formula", "aqd", "--formula", f])).trim(), "1");
    let dir = TempDir::new().unwrap();
    let (t1, t2) = build_pair(dir.path(), 1, 1, 1);
    let kein1 = "A x . pi(x) = R -> E y . pi(y) = x";
    let o = aqd(&["--json", "formula", "eval", "--formula", kein1, "--tree", p(&t1)]);
    let t1_value = json(&o)["value"].as_bool().unwrap();
    let o = aqd(&["--json", "formula", "eval", "--formula", kein1, "--tree", p(&t2)]);
    assert_ne!(json(&o)["value"].as_bool().unwrap(), t1_value);
    assert_eq!(aqd(&["formula", "eval", "--formula", "x = R", "--tree", p(&t1)]).status.code(), Some(2));
    assert_eq!(aqd(&["formula", "eval", "--formula", kein1]).status.code(), Some(2));
}

#[test]
fn game_solve_reports_winners() {
    let dir = TempDir::new().unwrap();
    let (t1, t2) = build_pair(dir.path(), 1, 1, 1);
    let o = aqd(&["--json", "game", "solve", "--left", p(&t1), "--right", p(&t2), "--variant", "switch:1,2"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["winner"], "spoiler");
    assert!(!v["spoiler_line"].as_array().unwrap().is_empty());
    let o = aqd(&[
        "game",
        "solve",
        "--left",
        p(&t1),
        "--right",
        p(&t2),
        "--variant",
        "batch:1,1",
        "--expect",
        "duplicator",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o =
        aqd(&["game", "solve", "--left", p(&t1), "--right", p(&t2), "--variant", "batch:1,1", "--expect", "spoiler"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(
        aqd(&["game", "solve", "--left", p(&t1), "--right", p(&t2), "--variant", "batch:1"]).status.code(),
        Some(2)
    );
}

#[test]
fn game_solve_with_designated_pairs() {
    let dir = TempDir::new().unwrap();
    let (t1, t2) = build_pair(dir.path(), 1, 1, 1);
    let pairs = dir.path().join("pairs.json");
    // Pairing the root with a non-root vertex is lost before play starts.
    std::fs::write(&pairs, "[[0, 1]]").unwrap();
    let o = aqd(&[
        "--json",
        "game",
        "solve",
        "--left",
        p(&t1),
        "--right",
        p(&t2),
        "--variant",
        "batch:1,1",
        "--designated",
        p(&pairs),
    ]);
    assert_eq!(json(&o)["winner"], "spoiler");
    std::fs::write(&pairs, "[[0, 99]]").unwrap();
    let o = aqd(&[
        "game",
        "solve",
        "--left",
        p(&t1),
        "--right",
        p(&t2),
        "--variant",
        "batch:1,1",
        "--designated",
        p(&pairs),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn interactive_play_saves_a_transcript_that_replays() {
    let dir = TempDir::new().unwrap();
    let (t1, t2) = build_pair(dir.path(), 2, 1, 2);
    let tr = dir.path().join("game.txt");
    let o = aqd_with_input(
        &[
            "game",
            "play",
            "--left",
            p(&t1),
            "--right",
            p(&t2),
            "--variant",
            "batch:2,1",
            "--human",
            "spoiler",
            "--transcript",
            p(&tr),
        ],
        "R:3\nnonsense\nR:2\nL:99\nL:9\n",
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("recursive engine"));
    assert!(text.contains("cannot read `nonsense`"));
    assert!(text.contains("must play on the left board"));
    assert!(text.contains("has no vertex 99"));
    assert!(text.contains("Duplicator wins"));
    assert!(text.contains("self-check"));
    let saved = std::fs::read_to_string(&tr).unwrap();
    assert!(saved.contains("result=satisfied"));

    let o = aqd(&["--json", "game", "replay", "--left", p(&t1), "--right", p(&t2), "--transcript", p(&tr)]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["result"], "satisfied");
    assert_eq!(v["matches"], true);
    assert_eq!(v["rounds"], 2);
}

#[test]
fn play_against_a_lost_position_and_json_output() {
    let dir = TempDir::new().unwrap();
    let (t1, t2) = build_pair(dir.path(), 1, 1, 1);
    let tr = dir.path().join("game.txt");
    let o = aqd_with_input(
        &[
            "--json",
            "game",
            "play",
            "--left",
            p(&t1),
            "--right",
            p(&t2),
            "--variant",
            "switch:1,2",
            "--transcript",
            p(&tr),
        ],
        "R:1\nL:4\n",
    );
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["engine"], "best-effort");
    assert!(v["result"].as_str().unwrap().starts_with("violated"));
    let o = aqd(&["game", "replay", "--left", p(&t1), "--right", p(&t2), "--transcript", p(&tr)]);
    assert!(o.status.success());
}

#[test]
fn replay_flags_a_tampered_result() {
    let dir = TempDir::new().unwrap();
    let (t1, t2) = build_pair(dir.path(), 1, 1, 1);
    let tr = dir.path().join("game.txt");
    std::fs::write(&tr, "variant=switch:1,2\ndesignated=\nround=1 spoiler=R:1 duplicator=L:1\nround=2 spoiler=L:4 duplicator=R:0\nresult=satisfied\n")
        .unwrap();
    let o = aqd(&["game", "replay", "--left", p(&t1), "--right", p(&t2), "--transcript", p(&tr)]);
    assert_eq!(o.status.code(), Some(1));
    std::fs::write(&tr, "variant=switch:1,2\nround=1 spoiler=R:1 duplicator=R:1\n").unwrap();
    let o = aqd(&["game", "replay", "--left", p(&t1), "--right", p(&t2), "--transcript", p(&tr)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn quitting_early_stops_the_game() {
    let dir = TempDir::new().unwrap();
    let (t1, t2) = build_pair(dir.path(), 1, 2, 2);
    let tr = dir.path().join("game.txt");
    let o = aqd_with_input(
        &["game", "play", "--left", p(&t1), "--right", p(&t2), "--variant", "batch:1,2", "--transcript", p(&tr)],
        "L:1\nquit\n",
    );
    assert!(o.status.success());
    assert!(stdout(&o).contains("stopped early"));
}

#[test]
fn verify_construction_passes_and_reports() {
    let o = aqd(&["--json", "verify", "construction", "--s", "2", "--k", "1", "--m", "2"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["passed"], true);
    assert_eq!(v["direct"], serde_json::json!([true, false]));
    assert_eq!(aqd(&["verify", "construction", "--s", "2", "--k", "1", "--m", "1"]).status.code(), Some(2));
}

#[test]
fn verify_sweeps() {
    let o = aqd(&["--json", "verify", "sweep", "--s", "1", "--k", "1"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["lines"], 9);
    assert_eq!(v["losses"], 0);

    let o = aqd(&["--json", "verify", "sweep", "--s", "2", "--k", "2", "--random", "500", "--seed", "3"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["lines"], 500);
    assert_eq!(v["seed"], 3);

    let o = aqd(&["--json", "verify", "sweep", "--s", "2", "--k", "1", "--variant", "sizes:1,1"]);
    assert!(o.status.success(), "{}", stdout(&o));

    let o =
        aqd(&["--json", "verify", "sweep", "--s", "1", "--k", "2", "--variant", "batch:1,1", "--engine", "minimax"]);
    assert!(o.status.success());
    assert!(json(&o)["strategy"].as_str().unwrap().contains("minimax"));

    // Duplicator loses, so there is nothing to sweep: a verification failure.
    let o = aqd(&["verify", "sweep", "--s", "1", "--k", "2", "--variant", "switch:1,2", "--engine", "minimax"]);
    assert_eq!(o.status.code(), Some(1));

    let o = aqd(&["verify", "sweep", "--s", "2", "--k", "1", "--max-lines", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_theorem1_finds_the_witness() {
    let o = aqd(&["--json", "verify", "theorem1", "--s", "1", "--k", "1", "--switches", "1", "--rounds", "2"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["winner"], "Spoiler");
    assert!(v["witness"].is_string());
    assert_eq!(v["counterexample"], false);

    let dir = TempDir::new().unwrap();
    let (t1, _) = build_pair(dir.path(), 1, 1, 1);
    let o =
        aqd(&["--json", "verify", "theorem1", "--left", p(&t1), "--right", p(&t1), "--switches", "2", "--rounds", "2"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["disagreeing"], serde_json::json!([]));
    assert_eq!(aqd(&["verify", "theorem1", "--switches", "1", "--rounds", "2"]).status.code(), Some(2));
}

#[test]
fn verify_lower_bound() {
    let o = aqd(&["--json", "verify", "lower-bound", "--s", "1", "--k", "2"]);
    assert!(o.status.success());
    let v = json(&o);
    assert!(v["verdict"].is_string());
    assert_eq!(v["steps"].as_array().unwrap().len(), 3);
    assert_eq!(aqd(&["verify", "lower-bound", "--s", "0", "--k", "1"]).status.code(), Some(2));
}
