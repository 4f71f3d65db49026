use std::process::{Command, Output};

use treefire::manifest::RunManifest;
use treefire::MoveLog;

fn treefire(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treefire"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn simulate_writes_log_with_manifest() {
    let dir = std::env::temp_dir().join(format!("treefire-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let log = dir.join("log.txt");
    let o = treefire(&[
        "simulate",
        "--chips",
        "7",
        "--flavor",
        "labeled",
        "--strategy",
        "random",
        "--seed",
        "3",
        "--log",
        log.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).ends_with("6 moves\n"));
    let text = std::fs::read_to_string(&log).unwrap();
    let (m, body) = RunManifest::parse(&text).unwrap();
    assert_eq!(m.seed, Some(3));
    assert_eq!(MoveLog::parse(body).unwrap().len(), 6);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn simulate_edge_cases() {
    let o = treefire(&["simulate", "--chips", "0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "0 moves\n");
    let o = treefire(&[
        "simulate",
        "--chips",
        "15",
        "--strategy",
        "waves",
        "--flavor",
        "unlabeled",
    ]);
    assert!(stdout(&o).ends_with("23 moves\n"));
    let o = treefire(&[
        "--format", "json", "simulate", "--chips", "5", "--flavor", "colored", "--red", "2",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["moves"], 2);
}

#[test]
fn exit_codes() {
    assert_eq!(
        treefire(&["simulate", "--chips", "3", "--strategy", "sideways"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        treefire(&["simulate", "--chips", "3", "--flavor", "colored", "--red", "9"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(treefire(&["enumerate", "--n", "7"]).status.code(), Some(3));
    assert_eq!(
        treefire(&["counterexample", "--id", "9.9"]).status.code(),
        Some(2)
    );
    let o = Command::new(env!("CARGO_BIN_EXE_treefire"))
        .args(["enumerate", "--n", "3"])
        .env(treefire::census::BUDGET_ENV, "64")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn enumerate_and_poset() {
    let o = treefire(&["enumerate", "--n", "3"]);
    assert_eq!(stdout(&o), "6\n");
    let o = treefire(&["poset", "--n", "4", "--check", "m3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("{(2,0); (4,0), (5,0), (1,1); (2,1)}"));
    let o = treefire(&["counterexample", "--id", "5.2"]);
    assert!(stdout(&o).ends_with("PASS\n"));
}
