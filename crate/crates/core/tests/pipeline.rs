mod common;

use stancelp::config::{LabelSource, RunConfig, Stage};
use stancelp::indicator::{read_indicator_csv, Granularity};
use stancelp::lp::bc_bootstrap_ci;
use stancelp::pipeline::{self, Layout};
use stancelp::synthetic::regression_dataset;

fn load(dir: &std::path::Path, overrides: serde_json::Value) -> RunConfig {
    let map = overrides.as_object().cloned().unwrap_or_default();
    RunConfig::load(&dir.join("config.json"), &map, Stage::Run).unwrap()
}

#[test]
fn lexicon_route_reproduces_the_label_file() {
    let dir = tempfile::tempdir().unwrap();
    common::copy_tree(&common::bundled_fixture(), dir.path());
    let from_file = load(dir.path(), serde_json::json!({"out_dir": dir.path().join("a")}));
    let from_lexicon = load(
        dir.path(),
        serde_json::json!({"out_dir": dir.path().join("b"), "labels": null}),
    );
    assert_eq!(from_lexicon.label_source(), LabelSource::DefaultLexicon);
    for cfg in [&from_file, &from_lexicon] {
        for stage in [Stage::Segment, Stage::Label, Stage::Aggregate] {
            pipeline::run_stage(cfg, stage).unwrap();
        }
    }
    for g in [Granularity::Fine, Granularity::Coarse] {
        let a = std::fs::read_to_string(Layout::new(&from_file).indicators(g)).unwrap();
        let b = std::fs::read_to_string(Layout::new(&from_lexicon).indicators(g)).unwrap();
        assert_eq!(read_indicator_csv(&a).unwrap(), read_indicator_csv(&b).unwrap());
    }
}

#[test]
fn intervals_narrow_as_noise_falls() {
    let width = |sd: f64| {
        let ds = regression_dataset(47, 0.05, sd, 99);
        let b = bc_bootstrap_ci(&ds, 400, 0.10, 5).unwrap();
        b.ci_high[1] - b.ci_low[1]
    };
    let (wide, mid, narrow) = (width(0.05), width(0.01), width(0.002));
    assert!(wide > mid && mid > narrow, "{wide} {mid} {narrow}");
}
