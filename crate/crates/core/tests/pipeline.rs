use std::fs;
use std::path::Path;

use proptest::prelude::*;
use wikitopics::pipeline::{run_stage, run_through, PipelineConfig, Stage, StageOutcome};
use wikitopics::reactions::EventOverlap;
use wikitopics::topics::BaselineDays;
use wikitopics::synth::{generate_corpus, SynthConfig};
use wikitopics::topics::TopicExport;

fn setup(root: &Path) -> PipelineConfig {
    let corpus = generate_corpus(&SynthConfig {
        events: 5,
        ..Default::default()
    })
    .unwrap();
    corpus.write(&root.join("corpus")).unwrap();
    PipelineConfig {
        corpus_dir: root.join("corpus"),
        work_dir: root.join("work"),
        ..Default::default()
    }
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for entry in walk(dir) {
        let rel = entry.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
        out.push((rel, fs::read(&entry).unwrap()));
    }
    out.sort();
    out
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut files = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            files.extend(walk(&p));
        } else {
            files.push(p);
        }
    }
    files
}

#[test]
fn end_to_end_runs_are_identical_and_reruns_are_noops() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg_a = setup(a.path());
    let cfg_b = setup(b.path());
    let first = run_through(Stage::Export, &cfg_a).unwrap();
    assert!(first.iter().all(|(_, o)| *o == StageOutcome::Ran));
    run_through(Stage::Export, &cfg_b).unwrap();
    assert_eq!(tree(&cfg_a.work_dir), tree(&cfg_b.work_dir));

    let again = run_through(Stage::Export, &cfg_a).unwrap();
    assert!(again.iter().all(|(_, o)| *o == StageOutcome::UpToDate));

    let export: TopicExport =
        serde_json::from_str(&fs::read_to_string(cfg_a.work_dir.join("export/topics_export.json")).unwrap()).unwrap();
    assert!(!export.topics.is_empty());
    let rankings = fs::read_to_string(cfg_a.work_dir.join("export/rankings.tsv")).unwrap();
    assert!(rankings.starts_with("feature\trank\ttopic_id\tvalue\n"));
    let index = fs::read_to_string(cfg_a.work_dir.join("networks/index.tsv")).unwrap();
    assert_eq!(index.lines().count(), 6);
}

#[test]
fn config_change_reruns_only_from_the_changed_stage() {
    let d = tempfile::tempdir().unwrap();
    let cfg = setup(d.path());
    run_through(Stage::Detect, &cfg).unwrap();
    let changed = PipelineConfig { seed: 9, ..cfg.clone() };
    // every manifest records the config, so all stages rerun under a new seed
    assert_eq!(run_stage(Stage::Ingest, &changed).unwrap(), StageOutcome::Ran);
    // a tampered output forces a rerun
    run_stage(Stage::Networks, &changed).unwrap();
    fs::write(changed.work_dir.join("networks/index.tsv"), "event_id\tnodes\tedges\tdegenerate\n").unwrap();
    assert_eq!(run_stage(Stage::Networks, &changed).unwrap(), StageOutcome::Ran);
    assert_eq!(run_stage(Stage::Networks, &changed).unwrap(), StageOutcome::UpToDate);
}

#[test]
fn out_of_order_stage_reports_upstream() {
    let d = tempfile::tempdir().unwrap();
    let cfg = setup(d.path());
    run_stage(Stage::Ingest, &cfg).unwrap();
    let err = run_stage(Stage::Correlate, &cfg).unwrap_err();
    assert!(err.is_usage());
    assert!(err.to_string().contains("build-networks"), "{err}");
}

proptest! {
    #[test]
    fn config_round_trips_through_toml(
        half_window in 2usize..60,
        corr in 2usize..8,
        floats in prop::collection::vec(0.0f64..1e3, 7),
        lower in 1e-9f64..1e-2,
        points in 2usize..100,
        seed in any::<u64>(),
        strict in any::<bool>(),
        before in any::<bool>(),
        click_weighted in any::<bool>(),
        prefixes in prop::collection::vec("[a-z]{2}\\.[a-z]", 0..4),
    ) {
        let mut c = PipelineConfig {
            corpus_dir: "some/corpus".into(),
            work_dir: "other work".into(),
            domain_prefixes: prefixes,
            window_days: 2 * half_window + 1,
            correlation_window: corr,
            edge_threshold: floats[0],
            tau: floats[1],
            gate: floats[2],
            seed,
            sweep_sample: points,
            export_top: points / 2,
            overlap: if strict { EventOverlap::LayerStartsOnDay } else { EventOverlap::WindowContainsDay },
            baseline_days: if before { BaselineDays::BeforeEventDay } else { BaselineDays::ThroughEventDay },
            ..Default::default()
        };
        c.resolutions.temporal = floats[3];
        c.resolutions.structural = floats[4];
        c.resolutions.navigational = floats[5];
        c.resolutions.higher = floats[6];
        c.grid.lower = lower;
        c.grid.points = points;
        c.pagerank.click_weighted = click_weighted;
        prop_assume!(c.validate().is_ok());
        prop_assert_eq!(PipelineConfig::from_toml(&c.to_toml()).unwrap(), c);
    }
}
