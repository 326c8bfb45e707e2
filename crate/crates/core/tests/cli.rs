mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::*;
use statement_net::pipeline::{self, OUTPUT_DIR_ENV};

fn cli(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_statement-net"));
    cmd.args(args).env_remove(OUTPUT_DIR_ENV);
    cmd
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = cmd.output().unwrap();
    (
        status.code().unwrap_or(-1),
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

fn sample_toml() -> String {
    data_dir().join("sample.toml").display().to_string()
}

fn write_triangle_corpus(dir: &Path) -> (String, String) {
    let corpus = dir.join("corpus.jsonl");
    fs::write(
        &corpus,
        concat!(
            r#"{"article_id":"t1","source":"Wire","published":"2020-05-01","headline":"x","body":"Ana Lima said Ben Cole and Cara Diaz met."}"#,
            "\n"
        ),
    )
    .unwrap();
    let gazetteer = dir.join("names.txt");
    fs::write(&gazetteer, "Ana Lima\nBen Cole\nCara Diaz\n").unwrap();
    (corpus.display().to_string(), gazetteer.display().to_string())
}

#[test]
fn full_run_writes_manifest() {
    let out = tempfile::tempdir().unwrap();
    let o = out.path().to_str().unwrap();
    let (code, stdout, stderr) = run(&mut cli(&["run", "--config", &sample_toml(), "--out", o]));
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("40 statements, 61 events"), "{stdout}");
    assert!(out.path().join(pipeline::MANIFEST).is_file());
    assert!(!out.path().join(pipeline::INCOMPLETE).exists());
}

#[test]
fn stages_run_in_sequence_and_cores_reports_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, gazetteer) = write_triangle_corpus(dir.path());
    let out = dir.path().join("out");
    let o = out.to_str().unwrap();
    let base = ["--corpus", corpus.as_str(), "--gazetteer", gazetteer.as_str(), "--out", o];

    let (code, _, stderr) = run(&mut cli(&[&["cores"], &base[..]].concat()));
    assert_eq!(code, 1, "cores before network is a usage error");
    assert!(stderr.contains("statement-net network"), "{stderr}");

    for stage in ["ingest-stats", "extract", "network"] {
        let (code, _, stderr) = run(&mut cli(&[&[stage], &base[..]].concat()));
        assert_eq!(code, 0, "{stage}: {stderr}");
    }
    let (code, stdout, _) = run(&mut cli(&[&["cores"], &base[..]].concat()));
    assert_eq!(code, 0);
    assert!(stdout.starts_with("max_core 2, top-core size 3"), "{stdout}");
    let cores = fs::read_to_string(out.join(pipeline::CORES)).unwrap();
    assert_eq!(cores.lines().count(), 4);
}

#[test]
fn overlap_with_single_bucket_fails() {
    let out = tempfile::tempdir().unwrap();
    let o = out.path().to_str().unwrap();
    let toml = sample_toml();
    let common = ["--config", toml.as_str(), "--out", o, "--bucket-months", "12"];
    for stage in ["ingest-stats", "extract", "buckets"] {
        let (code, _, stderr) = run(&mut cli(&[&[stage], &common[..]].concat()));
        assert_eq!(code, 0, "{stage}: {stderr}");
    }
    let (code, _, stderr) = run(&mut cli(&[&["overlap"], &common[..]].concat()));
    assert_ne!(code, 0);
    assert!(stderr.contains("≥ 2 periods, got 1"), "{stderr}");
}

#[test]
fn daily_counts_cover_every_day() {
    let out = tempfile::tempdir().unwrap();
    let o = out.path().to_str().unwrap();
    let toml = sample_toml();
    let common = ["--config", toml.as_str(), "--out", o];
    for stage in ["ingest-stats", "extract"] {
        assert_eq!(run(&mut cli(&[&[stage], &common[..]].concat())).0, 0);
    }
    let (code, stdout, stderr) =
        run(&mut cli(&[&["daily-counts", "--source", "Daily Courier"], &common[..]].concat()));
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("353 days, 30 events"), "{stdout}");
    let csv = fs::read_to_string(out.path().join("daily_counts_daily-courier.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 353);

    let (code, _, stderr) = run(&mut cli(&[&["daily-counts", "--source", "Nope"], &common[..]].concat()));
    assert_eq!(code, 2);
    assert!(stderr.contains("unknown source"), "{stderr}");
}

#[test]
fn missing_gazetteer_is_rejected_before_processing() {
    let out = tempfile::tempdir().unwrap();
    let target = out.path().join("bundle");
    let corpus = data_dir().join("corpus.jsonl");
    let (code, _, stderr) = run(&mut cli(&[
        "run",
        "--corpus",
        corpus.to_str().unwrap(),
        "--gazetteer",
        "/nonexistent/names.txt",
        "--out",
        target.to_str().unwrap(),
    ]));
    assert_eq!(code, 1);
    assert!(stderr.contains("gazetteer"), "{stderr}");
    assert!(!target.exists());
}

#[test]
fn malformed_corpus_fails_fast_or_skips() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, gazetteer) = write_triangle_corpus(dir.path());
    let mut text = fs::read_to_string(&corpus).unwrap();
    text.push_str("{not json\n");
    fs::write(&corpus, text).unwrap();
    let out = dir.path().join("out");
    let base = ["run", "--corpus", corpus.as_str(), "--gazetteer", gazetteer.as_str(), "--out"];

    let (code, _, stderr) = run(&mut cli(&[&base[..], &[out.to_str().unwrap()]].concat()));
    assert_eq!(code, 2);
    assert!(stderr.contains(":2: malformed record"), "{stderr}");
    assert!(out.join(pipeline::INCOMPLETE).is_file());
    assert!(!out.join(pipeline::MANIFEST).exists());

    let (code, _, stderr) =
        run(&mut cli(&[&base[..], &[out.to_str().unwrap(), "--skip-malformed"]].concat()));
    assert_eq!(code, 0, "{stderr}");
    assert!(!out.join(pipeline::INCOMPLETE).exists());
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join(pipeline::MANIFEST)).unwrap()).unwrap();
    assert_eq!(manifest["counts"]["skipped_records"], 1);
    assert_eq!(manifest["counts"]["events"], 3);
}

#[test]
fn output_dir_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let from_env = dir.path().join("env");
    let from_flag = dir.path().join("flag");
    let toml = sample_toml();

    let mut cmd = cli(&["ingest-stats", "--config", &toml]);
    cmd.env(OUTPUT_DIR_ENV, &from_env);
    assert_eq!(run(&mut cmd).0, 0);
    assert!(from_env.join(pipeline::CORPUS_STATS).is_file());

    let mut cmd = cli(&["ingest-stats", "--config", &toml, "--out", from_flag.to_str().unwrap()]);
    cmd.env(OUTPUT_DIR_ENV, dir.path().join("unused"));
    assert_eq!(run(&mut cmd).0, 0);
    assert!(from_flag.join(pipeline::CORPUS_STATS).is_file());
    assert!(!dir.path().join("unused").exists());
}

#[test]
fn external_tags_mode() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, _) = write_triangle_corpus(dir.path());
    let tags = dir.path().join("tags");
    fs::create_dir(&tags).unwrap();
    fs::write(
        tags.join("t1.tags"),
        "Ana\tB-PER\nLima\tI-PER\nsaid\tO\nBen\tB-PER\nCole\tI-PER\nmet\tO\n.\tO\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let args = [
        "run",
        "--corpus",
        corpus.as_str(),
        "--external-tags",
        tags.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    let (code, stdout, stderr) = run(&mut cli(&args));
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("1 statements, 1 events"), "{stdout}");

    fs::remove_file(tags.join("t1.tags")).unwrap();
    let (code, _, stderr) = run(&mut cli(&args));
    assert_eq!(code, 2);
    assert!(stderr.contains("no tag sidecar"), "{stderr}");
}
