mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::fixtures_dir;

fn evac(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evac")).args(args).current_dir(cwd).output().unwrap()
}

fn repo() -> std::path::PathBuf {
    fixtures_dir().parent().unwrap().to_path_buf()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn validate_clean_fixture() {
    let out = evac(&["validate", "fixtures/grid3x3.json"], &repo());
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report, serde_json::json!({"errors": [], "warnings": []}));
}

#[test]
fn validate_rejects_with_status_1() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixtures_dir().join("minimal.json")).unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, text.replace("\"exit\": \"N1\"", "\"exit\": \"N0\"")).unwrap();
    let out = evac(&["validate", bad.to_str().unwrap()], &repo());
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("EXIT_IS_START"));

    // malformed JSON is a validation failure too, not a usage error
    std::fs::write(&bad, "{\"id\": ").unwrap();
    let out = evac(&["validate", bad.to_str().unwrap()], &repo());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn usage_errors_print_the_grammar() {
    for args in [&[][..], &["frobnicate"], &["run", "fixtures/trap.json"], &["run", "fixtures/trap.json", "--policy", "psychic"]] {
        let out = evac(args, &repo());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains("evac stats <dir> --out <report.json>"), "{err}");
    }
}

#[test]
fn record_then_replay() {
    let dir = tempfile::tempdir().unwrap();
    let replay = dir.path().join("out.replay");
    let out = evac(&["run", "fixtures/trap.json", "--policy", "omniscient", "--record", replay.to_str().unwrap()], &repo());
    assert_eq!(out.status.code(), Some(0));
    let line = stdout(&out);
    assert!(line.starts_with("outcome=win "), "{line}");

    let text = std::fs::read_to_string(&replay).unwrap();
    assert!(text.starts_with("EVAC-REPLAY 1 trap "));
    assert!(text.trim_end().lines().last().unwrap().starts_with("outcome=win digest="));

    // scenario found under fixtures/ by id and digest
    let out = evac(&["replay", replay.to_str().unwrap()], &repo());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).starts_with("digest OK"));
    let digest = line.split("digest=").nth(1).unwrap().trim();
    assert!(stdout(&out).contains(digest));

    // the same inputs through the replay policy land on the same state
    let out = evac(&["run", "fixtures/trap.json", "--policy", "replay", "--trace", replay.to_str().unwrap()], &repo());
    assert_eq!(stdout(&out), line);
}

#[test]
fn tampered_replay_fails() {
    let dir = tempfile::tempdir().unwrap();
    let replay = dir.path().join("out.replay");
    evac(&["run", "fixtures/trap.json", "--policy", "omniscient", "--record", replay.to_str().unwrap()], &repo());
    let text = std::fs::read_to_string(&replay).unwrap();
    std::fs::write(&replay, text.replacen("brake=0", "brake=1", 1)).unwrap();
    let scenario = fixtures_dir().join("trap.json");
    let out = evac(&["replay", replay.to_str().unwrap(), "--scenario", scenario.to_str().unwrap()], &repo());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("diverged"));
}

#[test]
fn naive_falls_for_the_trap() {
    let out = evac(&["run", "fixtures/trap.json", "--policy", "naive"], &repo());
    assert!(stdout(&out).starts_with("outcome=lose:dead_end "));
}

#[test]
fn max_ticks_caps_the_run() {
    let out = evac(&["run", "fixtures/long600.json", "--policy", "naive", "--max-ticks", "10"], &repo());
    assert_eq!(out.status.code(), Some(0));
    let s = stdout(&out);
    assert!(s.starts_with("outcome=in_progress ticks=10 ") && s.trim_end().ends_with("timeout"), "{s}");
}

#[test]
fn solve_reports_both_answers() {
    assert!(stdout(&evac(&["solve", "fixtures/trap.json"], &repo())).starts_with("solvable witness_ticks="));
    assert_eq!(stdout(&evac(&["solve", "fixtures/sealed.json"], &repo())), "unsolvable\n");
}

#[test]
fn identical_argv_identical_stdout() {
    for args in [
        &["run", "fixtures/grid6x6_fire.json", "--policy", "informed"][..],
        &["solve", "fixtures/grid4x4_radio.json"],
        &["validate", "fixtures/sealed.json"],
    ] {
        let a = evac(args, &repo());
        let b = evac(args, &repo());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn stats_over_the_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = evac(&["stats", "fixtures", "--out", report.to_str().unwrap()], &repo());
    assert_eq!(out.status.code(), Some(0));
    let first = std::fs::read_to_string(&report).unwrap();
    let v: serde_json::Value = serde_json::from_str(&first).unwrap();
    let n = std::fs::read_dir(fixtures_dir()).unwrap().count();
    assert_eq!(v["summary"]["scenarios"], n);
    let sealed = v["scenarios"].as_array().unwrap().iter().find(|s| s["id"] == "sealed").unwrap();
    assert_eq!(sealed["solvable"], "no");

    // parallel analysis still gives a byte-identical report
    evac(&["stats", "fixtures", "--out", report.to_str().unwrap()], &repo());
    assert_eq!(std::fs::read_to_string(&report).unwrap(), first);
}
