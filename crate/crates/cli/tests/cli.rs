use std::fs;
use std::process::Command;

use wikitopics::labels::{AgreementCategory, AgreementSummary, LabelFile, LabelRecord, LABEL_SCHEMA_VERSION};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_wikitopics"));
    c.env("RUST_LOG", "error");
    c
}

fn coder(id: &str, cats: &[AgreementCategory]) -> LabelFile {
    LabelFile {
        schema_version: LABEL_SCHEMA_VERSION,
        coder_id: id.into(),
        labels: cats
            .iter()
            .enumerate()
            .map(|(t, &c)| LabelRecord {
                topic_id: t,
                coder_id: id.into(),
                label: format!("label {t}"),
                agreement: Some(c),
            })
            .collect(),
    }
}

#[test]
fn agreement_over_two_label_files() {
    use AgreementCategory::*;
    let d = tempfile::tempdir().unwrap();
    let a = coder("a", &[Strong, Strong, Partial, Partial, WeakNone]);
    let b = coder("b", &[Strong, Partial, Partial, Strong, Partial]);
    fs::write(d.path().join("a.json"), a.to_json()).unwrap();
    fs::write(d.path().join("b.json"), b.to_json()).unwrap();
    let out = d.path().join("summary.json");
    let status = bin()
        .arg("agreement")
        .arg(d.path().join("a.json"))
        .arg(d.path().join("b.json"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let s: AgreementSummary = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(s.topics, 5);
    assert_eq!(
        (s.unanimous_strong, s.strong_partial, s.unanimous_partial, s.weak_none),
        (20.0, 40.0, 20.0, 20.0)
    );
}

#[test]
fn exit_codes() {
    assert_eq!(bin().arg("--no-such-flag").output().unwrap().status.code(), Some(1));
    let d = tempfile::tempdir().unwrap();
    let missing_upstream = bin().arg("detect").current_dir(d.path()).output().unwrap();
    assert_eq!(missing_upstream.status.code(), Some(1));
    let bad = d.path().join("bad.json");
    fs::write(&bad, "{\"schema_version\": 1}").unwrap();
    assert_eq!(bin().arg("agreement").arg(&bad).output().unwrap().status.code(), Some(2));
    // corpus directory missing
    let no_corpus = bin().arg("ingest").current_dir(d.path()).output().unwrap();
    assert_eq!(no_corpus.status.code(), Some(1));
}

#[test]
fn work_dir_comes_from_the_environment() {
    let d = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["bench", "--events", "2", "--write-corpus"])
        .arg(d.path().join("corpus"))
        .arg("--out")
        .arg(d.path().join("report.json"))
        .status()
        .unwrap();
    assert!(status.success());
    let status = bin()
        .arg("ingest")
        .env("WIKITOPICS_CORPUS", d.path().join("corpus"))
        .env("WIKITOPICS_WORK", d.path().join("elsewhere"))
        .current_dir(d.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(d.path().join("elsewhere/ingest/manifest.json").exists());
}
