mod common;

use std::path::Path;
use std::process::{Command, Output};

fn stancelp(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stancelp"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn fixture_copy() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    common::copy_tree(&common::bundled_fixture(), dir.path());
    dir
}

#[test]
fn version_and_help() {
    let cwd = common::crate_dir();
    let v = stancelp(&["--version"], &cwd);
    assert!(v.status.success());
    assert!(String::from_utf8_lossy(&v.stdout).contains(stancelp::VERSION));
    let h = stancelp(&["--help"], &cwd);
    assert!(h.status.success());
    let text = String::from_utf8_lossy(&h.stdout);
    for sub in ["segment", "label", "aggregate", "outcomes", "estimate", "plot", "run"] {
        assert!(text.contains(sub), "help lacks {sub}");
    }
}

#[test]
fn missing_seed_is_a_config_error() {
    let dir = fixture_copy();
    let out = stancelp(&["segment", "--manifest", "manifest.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    assert!(err.to_string().contains("seed"), "{err}");
}

#[test]
fn unreadable_market_file_names_the_path() {
    let dir = fixture_copy();
    let cfg = dir.path().join("config.json");
    for stage in ["segment", "label", "aggregate"] {
        let out = stancelp(&[stage, "--config", cfg.to_str().unwrap()], dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let out = stancelp(
        &["outcomes", "--config", cfg.to_str().unwrap(), "--market-csv", "nowhere/QQQ.csv"],
        dir.path(),
    );
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("nowhere/QQQ.csv"), "{stderr}");
}

#[test]
fn run_matches_stage_by_stage_and_reruns_identically() {
    let staged = fixture_copy();
    let cfg = staged.path().join("config.json");
    for stage in ["segment", "label", "aggregate", "outcomes", "estimate", "plot"] {
        let out = stancelp(&[stage, "--config", cfg.to_str().unwrap(), "--reps", "200"], staged.path());
        assert!(out.status.success(), "{stage}: {}", String::from_utf8_lossy(&out.stderr));
    }

    let whole = fixture_copy();
    let cfg = whole.path().join("config.json");
    let run = || {
        let out = stancelp(&["run", "--config", cfg.to_str().unwrap(), "--reps", "200"], whole.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        common::hash_tree(&whole.path().join("out"))
    };
    let first = run();
    assert!(first.contains_key("run_summary.json"));
    assert_eq!(first, run(), "rerun changed the out/ tree");

    let mut staged_tree = common::hash_tree(&staged.path().join("out"));
    let mut run_tree = first;
    run_tree.remove("run_summary.json");
    staged_tree.remove("run_summary.json");
    assert_eq!(staged_tree, run_tree);
}
