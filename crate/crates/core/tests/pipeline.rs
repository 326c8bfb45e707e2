mod common;

use std::collections::BTreeSet;
use std::fs;

use common::*;
use proptest::prelude::*;
use statement_net::pipeline::{self, ConfigLayer, PipelineConfig, StageCounts};
use statement_net::temporal::{build_snapshot_series, hierarchy_buckets, SeriesMode};
use statement_net::{k_core_decompose, StatementNetwork};

fn config(layer: ConfigLayer) -> PipelineConfig {
    let file = ConfigLayer::load(data_dir().join("sample.toml")).unwrap();
    PipelineConfig::resolve(layer.over(file)).unwrap()
}

#[test]
fn sample_run_matches_golden_counts() {
    let out = tempfile::tempdir().unwrap();
    let run = pipeline::run_pipeline(&config(ConfigLayer {
        output_dir: Some(out.path().into()),
        ..Default::default()
    }))
    .unwrap();
    let golden: StageCounts =
        serde_json::from_str(&fs::read_to_string(fixture_dir().join("sample_counts.json")).unwrap()).unwrap();
    assert_eq!(run.manifest.counts, golden);
    assert_eq!(
        run.manifest.corpus_digest,
        "sha256:40c70742fa0a2a0ef580c7c56b8094d5c84f47c40ab46d6f650c249c628e1a87"
    );
    for report in &run.manifest.reports {
        let bytes = fs::metadata(out.path().join(&report.file)).unwrap().len();
        assert_eq!(bytes as usize, report.bytes, "{}", report.file);
    }
    let edges: Vec<(String, String)> = run
        .analysis
        .network
        .edges()
        .keys()
        .map(|p| (p.first().to_owned(), p.second().to_owned()))
        .collect();
    assert_eq!(run.analysis.cores.core_number, brute_force_core_map(&edges));
}

#[test]
fn headlines_are_opt_in() {
    let out = tempfile::tempdir().unwrap();
    let run = pipeline::run_pipeline(&config(ConfigLayer {
        output_dir: Some(out.path().into()),
        include_headline: Some(true),
        ..Default::default()
    }))
    .unwrap();
    // every sample headline reads "<name> says <name> must resign"
    assert_eq!(run.manifest.counts.sentences, 220 + 60);
    assert_eq!(run.manifest.counts.statements, 40 + 60);
}

#[test]
fn network_source_restricts_analyses_only() {
    let out = tempfile::tempdir().unwrap();
    let run = pipeline::run_pipeline(&config(ConfigLayer {
        output_dir: Some(out.path().into()),
        network_source: Some("Harbor Tribune".into()),
        ..Default::default()
    }))
    .unwrap();
    let counts = &run.manifest.counts;
    assert_eq!(counts.statements, 40);
    assert!(counts.network_statements < counts.statements);
    assert_eq!(counts.events, 31);
    assert!(run.analysis.statements.iter().any(|s| s.source == "Daily Courier"));
}

#[test]
fn empty_corpus_gives_empty_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("empty.jsonl");
    fs::write(&corpus, "").unwrap();
    let out = dir.path().join("out");
    let run = pipeline::run_pipeline(&config(ConfigLayer {
        corpus: Some(corpus),
        output_dir: Some(out.clone()),
        ..Default::default()
    }))
    .unwrap();
    assert_eq!(run.manifest.counts, StageCounts::default());
    assert!(run.analysis.summary.emergence.is_none());
    assert!(out.join(pipeline::MANIFEST).is_file());
    for report in &run.manifest.reports {
        if report.file != pipeline::SUMMARY {
            assert!(report.empty_by_data, "{}", report.file);
        }
    }
}

#[test]
fn missing_gazetteer_is_a_validation_error() {
    let cfg = config(ConfigLayer {
        gazetteer: Some("/nonexistent/names.txt".into()),
        output_dir: Some(tempfile::tempdir().unwrap().path().join("x")),
        ..Default::default()
    });
    let err = pipeline::run_pipeline(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 1);
}

fn random_statements(seed: u64, nodes: usize, count: usize) -> Vec<statement_net::StatementSentence> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let base = day("2019-01-01");
    (0..count)
        .map(|i| {
            let n = rng.gen_range(2..=4.min(nodes));
            let mut pool: Vec<usize> = (0..nodes).collect();
            let names: Vec<String> = (0..n).map(|_| node(pool.swap_remove(rng.gen_range(0..pool.len())))).collect();
            statement(&format!("a{i}"), base + chrono::Days::new(rng.gen_range(0..540)), 0, &names)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn buckets_agree_with_oracle(seed in any::<u64>(), nodes in 3usize..30, count in 1usize..120, threshold in 0usize..4) {
        let statements = random_statements(seed, nodes, count);
        let buckets = hierarchy_buckets(&statements, None, 6, threshold).unwrap();
        let series = build_snapshot_series(&statements, None, 6, SeriesMode::PerPeriod).unwrap();
        prop_assert_eq!(buckets.len(), series.len());
        for (bucket, snap) in buckets.iter().zip(&series.snapshots) {
            let range = bucket.period.range();
            let edges: Vec<(String, String)> = statements
                .iter()
                .filter(|s| range.contains(s.published))
                .flat_map(|s| {
                    let e = &s.entities;
                    (0..e.len()).flat_map(move |i| (i + 1..e.len()).map(move |j| (e[i].clone(), e[j].clone())))
                })
                .collect();
            let expected: BTreeSet<String> = brute_force_core_map(&edges)
                .into_iter()
                .filter(|(_, k)| *k > threshold)
                .map(|(n, _)| n)
                .collect();
            prop_assert_eq!(&bucket.members, &expected);
            prop_assert_eq!(snap.period, bucket.period);
        }
    }

    #[test]
    fn last_cumulative_snapshot_is_whole_network(seed in any::<u64>(), nodes in 3usize..30, count in 1usize..120, months in 1u32..7) {
        let statements = random_statements(seed, nodes, count);
        let series = build_snapshot_series(&statements, None, months, SeriesMode::Cumulative).unwrap();
        let whole = StatementNetwork::build(&statements, None).unwrap();
        let last = series.last().unwrap();
        prop_assert_eq!(&last.network, &whole);
        prop_assert_eq!(&last.cores, &k_core_decompose(&whole));
        let per_period = build_snapshot_series(&statements, None, months, SeriesMode::PerPeriod).unwrap();
        let events: usize = per_period.snapshots.iter().map(|s| s.network.event_count()).sum();
        prop_assert_eq!(events, whole.event_count());
    }
}
