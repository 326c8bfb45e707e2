//! End-to-end orchestration: configuration, cached intermediates, report
//! files and the run manifest.
//!
//! Every stage reads and writes plain files in the output directory so that
//! later stages can be rerun without re-tagging:
//!
//! | file                   | written by      | contents                                   |
//! |------------------------|-----------------|--------------------------------------------|
//! | `corpus_stats.json`    | ingest-stats    | per-source counts and date ranges          |
//! | `statements.jsonl`     | extract         | one statement sentence per line            |
//! | `network_edges.tsv`    | network         | `nodeA  nodeB  event-count`                |
//! | `network_events.tsv`   | network         | `nodeA  nodeB  date  article_id`           |
//! | `cores.csv`            | cores           | `node,core_number`                         |
//! | `trajectories.csv`     | trajectories    | `period,node,core_rank`                    |
//! | `buckets.csv`          | buckets         | `period,node` (empty node = empty bucket)  |
//! | `overlap.csv`          | overlap         | `period_pair,percent`                      |
//! | `daily_counts_<s>.csv` | daily-counts    | `date,count` per source slug `<s>`         |
//! | `summary.json`         | run             | headline statistics of every analysis      |
//! | `manifest.json`        | run             | config, corpus digest, counts, report list |

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{corpus_stats, ingest_corpus, CorpusStats, DateRange, IngestOptions, MalformedPolicy};
use crate::error::{Error, Result};
use crate::extract::{extract_statements, ExtractOptions, SpeechLexicon, StatementSentence};
use crate::graph::{decompose_edges, k_core_decompose, read_edges, CoreDecomposition, Pair, StatementNetwork};
use crate::tagging::{ExternalTags, Gazetteer, MergeRules, Tagger};
use crate::temporal::{
    buckets_from_series, build_snapshot_series, core_rank_trajectories, daily_edge_counts,
    distribution_summary, overlap_series, top_core_emergence, DailyEdgeCounts, DistributionSummary,
    HierarchyBucket, OverlapMetric, OverlapSeries, SeriesMode, Trajectory,
};

pub const CORPUS_STATS: &str = "corpus_stats.json";
pub const STATEMENTS: &str = "statements.jsonl";
pub const NETWORK_EDGES: &str = "network_edges.tsv";
pub const NETWORK_EVENTS: &str = "network_events.tsv";
pub const CORES: &str = "cores.csv";
pub const TRAJECTORIES: &str = "trajectories.csv";
pub const BUCKETS: &str = "buckets.csv";
pub const OVERLAP: &str = "overlap.csv";
pub const SUMMARY: &str = "summary.json";
pub const MANIFEST: &str = "manifest.json";
pub const INCOMPLETE: &str = "INCOMPLETE";

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "STATEMENT_NET_OUT";
pub const DEFAULT_OUTPUT_DIR: &str = "statement-net-out";

/// Settings as written in a config file or given as flags. Unset fields fall
/// through to the next layer (flag > environment > config file > default).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigLayer {
    pub corpus: Option<PathBuf>,
    pub gazetteer: Option<PathBuf>,
    pub external_tags: Option<PathBuf>,
    pub merge_rules: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub require_both: Option<bool>,
    pub quote_trigger: Option<bool>,
    pub include_headline: Option<bool>,
    pub skip_malformed: Option<bool>,
    /// Restrict network analyses to one source.
    pub network_source: Option<String>,
    pub trajectory_months: Option<u32>,
    pub trajectory_nodes: Option<Vec<String>>,
    pub bucket_months: Option<u32>,
    pub bucket_threshold: Option<usize>,
    pub overlap_metric: Option<OverlapMetric>,
    pub output_dir: Option<PathBuf>,
}

impl ConfigLayer {
    /// Reads a TOML config; relative paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut layer: ConfigLayer =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut layer.corpus,
            &mut layer.gazetteer,
            &mut layer.external_tags,
            &mut layer.merge_rules,
            &mut layer.lexicon,
            &mut layer.output_dir,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(layer)
    }

    /// Fields set in `self` win over `lower`. Choosing a tagger in `self`
    /// replaces both tagger fields of `lower`.
    pub fn over(self, lower: ConfigLayer) -> ConfigLayer {
        let (gazetteer, external_tags) = if self.gazetteer.is_some() || self.external_tags.is_some() {
            (self.gazetteer, self.external_tags)
        } else {
            (lower.gazetteer, lower.external_tags)
        };
        ConfigLayer {
            corpus: self.corpus.or(lower.corpus),
            gazetteer,
            external_tags,
            merge_rules: self.merge_rules.or(lower.merge_rules),
            lexicon: self.lexicon.or(lower.lexicon),
            require_both: self.require_both.or(lower.require_both),
            quote_trigger: self.quote_trigger.or(lower.quote_trigger),
            include_headline: self.include_headline.or(lower.include_headline),
            skip_malformed: self.skip_malformed.or(lower.skip_malformed),
            network_source: self.network_source.or(lower.network_source),
            trajectory_months: self.trajectory_months.or(lower.trajectory_months),
            trajectory_nodes: self.trajectory_nodes.or(lower.trajectory_nodes),
            bucket_months: self.bucket_months.or(lower.bucket_months),
            bucket_threshold: self.bucket_threshold.or(lower.bucket_threshold),
            overlap_metric: self.overlap_metric.or(lower.overlap_metric),
            output_dir: self.output_dir.or(lower.output_dir),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "path")]
pub enum TaggerSource {
    Gazetteer(PathBuf),
    ExternalTags(PathBuf),
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub corpus: Option<PathBuf>,
    pub tagger: Option<TaggerSource>,
    pub merge_rules: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub require_both: bool,
    pub quote_trigger: bool,
    pub include_headline: bool,
    pub malformed: MalformedPolicy,
    pub network_source: Option<String>,
    pub trajectory_months: u32,
    pub trajectory_nodes: Option<Vec<String>>,
    pub bucket_months: u32,
    pub bucket_threshold: usize,
    pub overlap_metric: OverlapMetric,
    /// Not part of the manifest snapshot: a bundle is identical wherever it is written.
    #[serde(skip)]
    pub output_dir: PathBuf,
}

impl PipelineConfig {
    pub fn resolve(layer: ConfigLayer) -> Result<Self> {
        let tagger = match (layer.gazetteer, layer.external_tags) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "choose one tagger: gazetteer or external_tags".into(),
                ))
            }
            (Some(g), None) => Some(TaggerSource::Gazetteer(g)),
            (None, Some(e)) => Some(TaggerSource::ExternalTags(e)),
            (None, None) => None,
        };
        let config = PipelineConfig {
            corpus: layer.corpus,
            tagger,
            merge_rules: layer.merge_rules,
            lexicon: layer.lexicon,
            require_both: layer.require_both.unwrap_or(false),
            quote_trigger: layer.quote_trigger.unwrap_or(true),
            include_headline: layer.include_headline.unwrap_or(false),
            malformed: if layer.skip_malformed.unwrap_or(false) {
                MalformedPolicy::Skip
            } else {
                MalformedPolicy::FailFast
            },
            network_source: layer.network_source,
            trajectory_months: layer.trajectory_months.unwrap_or(1),
            trajectory_nodes: layer.trajectory_nodes,
            bucket_months: layer.bucket_months.unwrap_or(6),
            bucket_threshold: layer.bucket_threshold.unwrap_or(7),
            overlap_metric: layer.overlap_metric.unwrap_or_default(),
            output_dir: layer
                .output_dir
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
        };
        if config.trajectory_months == 0 || config.bucket_months == 0 {
            return Err(Error::Config("period lengths must be positive".into()));
        }
        if config.require_both && !config.quote_trigger {
            return Err(Error::Config(
                "require_both needs quote triggers enabled".into(),
            ));
        }
        Ok(config)
    }

    pub fn out(&self, file: &str) -> PathBuf {
        self.output_dir.join(file)
    }

    fn corpus_path(&self) -> Result<&Path> {
        let path = self
            .corpus
            .as_deref()
            .ok_or_else(|| Error::Config("no corpus given (--corpus or `corpus =`)".into()))?;
        require_file(path, "corpus")?;
        Ok(path)
    }

    /// Checks every input the extract stage needs, before any processing.
    pub fn validate_inputs(&self) -> Result<()> {
        self.corpus_path()?;
        match &self.tagger {
            None => {
                return Err(Error::Config(
                    "no tagger given (--gazetteer or --external-tags)".into(),
                ))
            }
            Some(TaggerSource::Gazetteer(p)) => require_file(p, "gazetteer")?,
            Some(TaggerSource::ExternalTags(p)) => {
                if !p.is_dir() {
                    return Err(Error::Config(format!(
                        "external tags directory {} does not exist",
                        p.display()
                    )));
                }
            }
        }
        if let Some(p) = &self.merge_rules {
            require_file(p, "merge rules")?;
        }
        if let Some(p) = &self.lexicon {
            require_file(p, "lexicon")?;
        }
        Ok(())
    }
}

fn require_file(path: &Path, what: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} file {} does not exist", path.display())))
    }
}

fn stage<T>(name: &'static str, result: Result<T>) -> Result<T> {
    result.map_err(|e| match e {
        Error::Config(_) | Error::Stage { .. } => e,
        other => Error::Stage {
            stage: name,
            source: Box::new(other),
        },
    })
}

/// Writes through a temporary file and renames into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn read_intermediate(config: &PipelineConfig, file: &str, stage: &'static str) -> Result<String> {
    let path = config.out(file);
    match fs::read_to_string(&path) {
        Ok(text) => Ok(text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(Error::MissingIntermediate { path, stage }),
        Err(e) => Err(Error::io(path, e)),
    }
}

fn corrupt(path: PathBuf, reason: impl Into<String>) -> Error {
    Error::MalformedLine {
        path,
        line: 0,
        reason: reason.into(),
    }
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("report serializes");
    out.push(b'\n');
    out
}

/// Lowercase ASCII slug used in per-source file names.
pub fn source_slug(source: &str) -> String {
    let mut slug = String::new();
    for c in source.chars() {
        if c.is_ascii_alphanumeric() {
            slug.push(c.to_ascii_lowercase());
        } else if !slug.ends_with('-') && !slug.is_empty() {
            slug.push('-');
        }
    }
    let slug = slug.trim_end_matches('-').to_owned();
    if slug.is_empty() {
        "source".into()
    } else {
        slug
    }
}

pub fn daily_counts_file(source: &str) -> String {
    format!("daily_counts_{}.csv", source_slug(source))
}

// ---- stages ----------------------------------------------------------------

#[derive(Debug, Clone, Default)]
pub struct Extraction {
    pub articles: usize,
    pub sentences: usize,
    pub statements: Vec<StatementSentence>,
}

pub fn load_tagger(config: &PipelineConfig) -> Result<Tagger> {
    match &config.tagger {
        Some(TaggerSource::Gazetteer(p)) => Ok(Tagger::Gazetteer(Gazetteer::load(p)?)),
        Some(TaggerSource::ExternalTags(p)) => Ok(Tagger::External(ExternalTags::new(p))),
        None => Err(Error::Config("no tagger configured".into())),
    }
}

pub fn load_lexicon(config: &PipelineConfig) -> Result<SpeechLexicon> {
    let lexicon = match &config.lexicon {
        Some(p) => SpeechLexicon::load(p)?,
        None => SpeechLexicon::default(),
    };
    lexicon.with_triggers(config.quote_trigger, config.require_both)
}

pub fn ingest(config: &PipelineConfig) -> Result<(crate::corpus::Corpus, CorpusStats)> {
    let path = config.corpus_path()?;
    let corpus = stage(
        "ingest",
        ingest_corpus(
            path,
            &IngestOptions {
                malformed: config.malformed,
            },
        ),
    )?;
    let stats = corpus_stats(&corpus);
    Ok((corpus, stats))
}

pub fn extract(config: &PipelineConfig, corpus: &crate::corpus::Corpus) -> Result<Extraction> {
    let tagger = stage("tag", load_tagger(config))?;
    let lexicon = stage("extract", load_lexicon(config))?;
    let rules = match &config.merge_rules {
        Some(p) => stage("tag", MergeRules::load(p))?,
        None => MergeRules::default(),
    };
    let options = ExtractOptions {
        include_headline: config.include_headline,
    };
    let mut out = Extraction {
        articles: corpus.len(),
        ..Default::default()
    };
    for article in corpus.articles() {
        let found = stage(
            "extract",
            extract_statements(article, &tagger, &lexicon, &rules, &options),
        )?;
        out.sentences += found.sentences;
        out.statements.extend(found.statements);
    }
    Ok(out)
}

fn statements_jsonl(statements: &[StatementSentence]) -> Vec<u8> {
    let mut out = Vec::new();
    for s in statements {
        serde_json::to_writer(&mut out, s).expect("statement serializes");
        out.push(b'\n');
    }
    out
}

pub fn read_statements(config: &PipelineConfig) -> Result<Vec<StatementSentence>> {
    let text = read_intermediate(config, STATEMENTS, "extract")?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::MalformedLine {
                path: config.out(STATEMENTS),
                line: i + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

pub fn read_corpus_stats(config: &PipelineConfig) -> Result<CorpusStats> {
    let text = read_intermediate(config, CORPUS_STATS, "ingest-stats")?;
    serde_json::from_str(&text).map_err(|e| corrupt(config.out(CORPUS_STATS), e.to_string()))
}

/// Statements the network analyses run on (all, or one source).
pub fn network_statements(config: &PipelineConfig, statements: &[StatementSentence]) -> Vec<StatementSentence> {
    match &config.network_source {
        Some(src) => statements.iter().filter(|s| &s.source == src).cloned().collect(),
        None => statements.to_vec(),
    }
}

/// Date span the period grid is laid over.
pub fn analysis_span(config: &PipelineConfig, stats: &CorpusStats) -> Result<Option<DateRange>> {
    if let Some(src) = &config.network_source {
        let s = stats
            .sources
            .get(src)
            .ok_or_else(|| Error::UnknownSource(src.clone()))?;
        return Ok(Some(s.range()));
    }
    Ok(stats.sources.values().map(|s| s.range()).reduce(|mut a, b| {
        a.extend(b.first);
        a.extend(b.last);
        a
    }))
}

// ---- report rendering ------------------------------------------------------

fn csv_bytes<F>(header: &[&str], fill: F) -> Vec<u8>
where
    F: FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()>,
{
    let mut out = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(header).expect("write to memory");
        fill(&mut w).expect("write to memory");
        w.flush().expect("write to memory");
    }
    out
}

pub fn network_files(network: &StatementNetwork) -> (Vec<u8>, Vec<u8>) {
    let mut edges = Vec::new();
    let mut events = Vec::new();
    network.write_edges(&mut edges).expect("write to memory");
    network.write_events(&mut events).expect("write to memory");
    (edges, events)
}

pub fn cores_csv(cores: &CoreDecomposition) -> Vec<u8> {
    csv_bytes(&["node", "core_number"], |w| {
        for (node, k) in &cores.core_number {
            w.write_record([node.as_str(), &k.to_string()])?;
        }
        Ok(())
    })
}

pub fn trajectories_csv(trajectories: &[Trajectory]) -> Vec<u8> {
    let mut rows: Vec<(usize, &str, &str, usize)> = Vec::new();
    for t in trajectories {
        for (i, p) in t.values.iter().enumerate() {
            rows.push((i, &p.period, &t.node, p.core_rank));
        }
    }
    rows.sort();
    csv_bytes(&["period", "node", "core_rank"], |w| {
        for (_, period, node, rank) in rows {
            w.write_record([period, node, &rank.to_string()])?;
        }
        Ok(())
    })
}

pub fn buckets_csv(buckets: &[HierarchyBucket]) -> Vec<u8> {
    csv_bytes(&["period", "node"], |w| {
        for b in buckets {
            let label = b.period.label();
            if b.members.is_empty() {
                w.write_record([label.as_str(), ""])?;
            }
            for m in &b.members {
                w.write_record([label.as_str(), m])?;
            }
        }
        Ok(())
    })
}

/// Inverse of [`buckets_csv`]: `(period label, members)` in file order.
pub fn parse_buckets_csv(bytes: &[u8]) -> std::result::Result<Vec<(String, BTreeSet<String>)>, String> {
    let mut reader = csv::Reader::from_reader(bytes);
    let mut out: Vec<(String, BTreeSet<String>)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| e.to_string())?;
        let (Some(period), Some(node)) = (record.get(0), record.get(1)) else {
            return Err("expected period,node".into());
        };
        if out.last().is_none_or(|(p, _)| p != period) {
            out.push((period.to_owned(), BTreeSet::new()));
        }
        if !node.is_empty() {
            out.last_mut().expect("pushed").1.insert(node.to_owned());
        }
    }
    Ok(out)
}

pub fn overlap_csv(series: &OverlapSeries) -> Vec<u8> {
    csv_bytes(&["period_pair", "percent"], |w| {
        for p in &series.points {
            w.write_record([p.label(), format!("{:.2}", p.percent)])?;
        }
        Ok(())
    })
}

pub fn daily_counts_csv(counts: &DailyEdgeCounts) -> Vec<u8> {
    csv_bytes(&["date", "count"], |w| {
        for (d, c) in &counts.counts {
            w.write_record([d.to_string(), c.to_string()])?;
        }
        Ok(())
    })
}

// ---- full run ----------------------------------------------------------------

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub articles_in: usize,
    pub skipped_records: usize,
    pub sentences: usize,
    pub statements: usize,
    /// Statements feeding the network (after any source restriction).
    pub network_statements: usize,
    pub events: usize,
    pub nodes: usize,
    pub simple_edges: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub file: String,
    pub bytes: usize,
    pub data_rows: usize,
    pub empty_by_data: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: PipelineConfig,
    pub corpus_digest: String,
    pub counts: StageCounts,
    pub reports: Vec<ReportEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmergenceSummary {
    pub period: String,
    pub index: usize,
    pub before_final: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkSummary {
    pub nodes: usize,
    pub simple_edges: usize,
    pub events: usize,
    pub max_core: usize,
    /// Distinct non-empty shells.
    pub shell_count: usize,
    pub shell_sizes: BTreeMap<usize, usize>,
    pub top_core: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BucketSummary {
    pub period: String,
    pub partial: bool,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub network: NetworkSummary,
    /// "core rank" is the node's core number in a snapshot, 0 when absent.
    pub core_rank_definition: String,
    pub trajectory_months: u32,
    pub trajectory_periods: Vec<String>,
    pub trajectory_nodes: Vec<String>,
    pub emergence: Option<EmergenceSummary>,
    pub bucket_months: u32,
    pub bucket_threshold: usize,
    pub buckets: Vec<BucketSummary>,
    pub overlap: Option<OverlapSeries>,
    pub daily_counts: BTreeMap<String, DistributionSummary>,
}

/// Everything one run computes, kept in memory for callers.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub stats: CorpusStats,
    pub statements: Vec<StatementSentence>,
    pub network: StatementNetwork,
    pub cores: CoreDecomposition,
    pub trajectories: Vec<Trajectory>,
    pub buckets: Vec<HierarchyBucket>,
    pub overlap: Option<OverlapSeries>,
    pub daily: Vec<DailyEdgeCounts>,
    pub summary: Summary,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub manifest: RunManifest,
    pub analysis: Analysis,
}

/// Runs every analysis on already-extracted statements.
pub fn analyze(config: &PipelineConfig, stats: CorpusStats, statements: Vec<StatementSentence>) -> Result<Analysis> {
    let scoped = network_statements(config, &statements);
    let span = stage("network", analysis_span(config, &stats))?;
    let network = stage("network", StatementNetwork::build(&scoped, None))?;
    let cores = k_core_decompose(&network);

    let cumulative = stage(
        "trajectories",
        build_snapshot_series(&scoped, span, config.trajectory_months, SeriesMode::Cumulative),
    )?;
    let emergence = if network.is_empty() {
        None
    } else {
        Some(stage("trajectories", top_core_emergence(&cumulative))?)
    };
    let nodes: Vec<String> = match &config.trajectory_nodes {
        Some(nodes) => nodes.clone(),
        None => cores.top_core().map(|t| t.into_iter().collect()).unwrap_or_default(),
    };
    let trajectories = core_rank_trajectories(&cumulative, nodes.iter().map(String::as_str));

    let per_period = stage(
        "buckets",
        build_snapshot_series(&scoped, span, config.bucket_months, SeriesMode::PerPeriod),
    )?;
    let buckets = buckets_from_series(&per_period, config.bucket_threshold);
    let overlap = if buckets.len() >= 2 {
        Some(stage("overlap", overlap_series(&buckets, config.overlap_metric))?)
    } else {
        None
    };

    let mut daily = Vec::new();
    for source in stats.sources.keys() {
        daily.push(stage("daily-counts", daily_edge_counts(&statements, &stats, source))?);
    }

    let summary = Summary {
        network: NetworkSummary {
            nodes: network.node_count(),
            simple_edges: network.edge_count(),
            events: network.event_count(),
            max_core: cores.max_core,
            shell_count: cores.shell_count(),
            shell_sizes: cores.shells.iter().map(|(k, s)| (*k, s.len())).collect(),
            top_core: cores.top_core().map(|t| t.into_iter().collect()).unwrap_or_default(),
        },
        core_rank_definition: "core number of the node in each cumulative snapshot; 0 when absent".into(),
        trajectory_months: config.trajectory_months,
        trajectory_periods: cumulative.snapshots.iter().map(|s| s.period.label()).collect(),
        trajectory_nodes: nodes,
        emergence: emergence.map(|e| EmergenceSummary {
            period: e.period.label(),
            index: e.period.index,
            before_final: e.before_final,
        }),
        bucket_months: config.bucket_months,
        bucket_threshold: config.bucket_threshold,
        buckets: buckets
            .iter()
            .map(|b| BucketSummary {
                period: b.period.label(),
                partial: b.period.partial,
                size: b.members.len(),
            })
            .collect(),
        overlap: overlap.clone(),
        daily_counts: daily
            .iter()
            .map(|d| (d.source.clone(), distribution_summary(d)))
            .collect(),
    };

    Ok(Analysis {
        stats,
        statements,
        network,
        cores,
        trajectories,
        buckets,
        overlap,
        daily,
        summary,
    })
}

fn check_counts(counts: &StageCounts, scoped: &[StatementSentence]) -> Result<()> {
    let expected: usize = scoped.iter().map(StatementSentence::pair_count).sum();
    if counts.events != expected {
        return Err(Error::Invariant(format!(
            "{} edge events but statements imply {expected}",
            counts.events
        )));
    }
    if counts.statements > counts.sentences || counts.network_statements > counts.statements {
        return Err(Error::Invariant(format!(
            "statement counts exceed sentence counts: {counts:?}"
        )));
    }
    Ok(())
}

/// Full run: ingest, tag, extract, build, decompose, temporal analyses,
/// report files and manifest. On failure an `INCOMPLETE` marker naming the
/// error is left in the output directory and no manifest is written.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutput> {
    config.validate_inputs()?;
    let out_dir = &config.output_dir;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    for stale in [MANIFEST, INCOMPLETE] {
        let path = config.out(stale);
        if path.exists() {
            fs::remove_file(&path).map_err(|e| Error::io(path, e))?;
        }
    }
    let result = run_stages(config);
    if let Err(e) = &result {
        let _ = fs::write(config.out(INCOMPLETE), format!("{e}\n"));
    }
    result
}

fn run_stages(config: &PipelineConfig) -> Result<PipelineOutput> {
    let corpus_path = config.corpus_path()?;
    let corpus_bytes = fs::read(corpus_path).map_err(|e| Error::io(corpus_path, e))?;
    let corpus_digest = format!("sha256:{}", hex::encode(Sha256::digest(&corpus_bytes)));

    let (corpus, stats) = ingest(config)?;
    let extraction = extract(config, &corpus)?;
    let sentences = extraction.sentences;
    let analysis = analyze(config, stats, extraction.statements)?;
    let scoped = network_statements(config, &analysis.statements);

    let counts = StageCounts {
        articles_in: corpus.len(),
        skipped_records: corpus.skipped().len(),
        sentences,
        statements: analysis.statements.len(),
        network_statements: scoped.len(),
        events: analysis.network.event_count(),
        nodes: analysis.network.node_count(),
        simple_edges: analysis.network.edge_count(),
    };
    check_counts(&counts, &scoped)?;

    let (edges, events) = network_files(&analysis.network);
    let mut files: Vec<(String, Vec<u8>, usize)> = vec![
        (CORPUS_STATS.into(), json(&analysis.stats), analysis.stats.sources.len()),
        (STATEMENTS.into(), statements_jsonl(&analysis.statements), analysis.statements.len()),
        (NETWORK_EDGES.into(), edges, analysis.network.edge_count()),
        (NETWORK_EVENTS.into(), events, analysis.network.event_count()),
        (CORES.into(), cores_csv(&analysis.cores), analysis.cores.core_number.len()),
        (
            TRAJECTORIES.into(),
            trajectories_csv(&analysis.trajectories),
            analysis.trajectories.iter().map(|t| t.values.len()).sum(),
        ),
        (
            BUCKETS.into(),
            buckets_csv(&analysis.buckets),
            analysis.buckets.iter().map(|b| b.members.len()).sum(),
        ),
        (
            OVERLAP.into(),
            analysis.overlap.as_ref().map_or_else(
                || overlap_csv(&OverlapSeries { metric: config.overlap_metric, points: Vec::new() }),
                overlap_csv,
            ),
            analysis.overlap.as_ref().map_or(0, |o| o.points.len()),
        ),
    ];
    for d in &analysis.daily {
        files.push((daily_counts_file(&d.source), daily_counts_csv(d), d.counts.len()));
    }
    files.push((SUMMARY.into(), json(&analysis.summary), 1));

    let mut reports = Vec::new();
    for (name, bytes, rows) in files {
        stage("report", write_atomic(&config.out(&name), &bytes))?;
        reports.push(ReportEntry {
            file: name,
            bytes: bytes.len(),
            data_rows: rows,
            empty_by_data: rows == 0,
        });
    }

    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: config.clone(),
        corpus_digest,
        counts,
        reports,
    };
    stage("report", write_atomic(&config.out(MANIFEST), &json(&manifest)))?;
    Ok(PipelineOutput { manifest, analysis })
}

// ---- per-stage subcommands -------------------------------------------------------

pub fn cmd_ingest_stats(config: &PipelineConfig) -> Result<String> {
    let (corpus, stats) = ingest(config)?;
    write_atomic(&config.out(CORPUS_STATS), &json(&stats))?;
    Ok(format!(
        "{} articles from {} sources ({} skipped) -> {}",
        corpus.len(),
        stats.sources.len(),
        stats.skipped_records,
        config.out(CORPUS_STATS).display()
    ))
}

pub fn cmd_extract(config: &PipelineConfig) -> Result<String> {
    config.validate_inputs()?;
    let (corpus, stats) = ingest(config)?;
    let extraction = extract(config, &corpus)?;
    write_atomic(&config.out(CORPUS_STATS), &json(&stats))?;
    write_atomic(&config.out(STATEMENTS), &statements_jsonl(&extraction.statements))?;
    Ok(format!(
        "{} statements from {} sentences in {} articles -> {}",
        extraction.statements.len(),
        extraction.sentences,
        extraction.articles,
        config.out(STATEMENTS).display()
    ))
}

pub fn cmd_network(config: &PipelineConfig) -> Result<String> {
    let statements = read_statements(config)?;
    let scoped = network_statements(config, &statements);
    let network = StatementNetwork::build(&scoped, None)?;
    let (edges, events) = network_files(&network);
    write_atomic(&config.out(NETWORK_EDGES), &edges)?;
    write_atomic(&config.out(NETWORK_EVENTS), &events)?;
    Ok(format!(
        "{} nodes, {} simple edges, {} events -> {}",
        network.node_count(),
        network.edge_count(),
        network.event_count(),
        config.out(NETWORK_EDGES).display()
    ))
}

pub fn cmd_cores(config: &PipelineConfig) -> Result<String> {
    let text = read_intermediate(config, NETWORK_EDGES, "network")?;
    let edges = read_edges(text.as_bytes()).map_err(|e| corrupt(config.out(NETWORK_EDGES), e))?;
    let pairs: Vec<&Pair> = edges.iter().map(|(p, _)| p).collect();
    let cores = decompose_edges(std::iter::empty(), pairs);
    write_atomic(&config.out(CORES), &cores_csv(&cores))?;
    let top = cores.top_core().map(|t| t.len()).unwrap_or(0);
    Ok(format!(
        "max_core {}, top-core size {top}, {} shells -> {}",
        cores.max_core,
        cores.shell_count(),
        config.out(CORES).display()
    ))
}

pub fn cmd_trajectories(config: &PipelineConfig) -> Result<String> {
    let statements = read_statements(config)?;
    let stats = read_corpus_stats(config)?;
    let scoped = network_statements(config, &statements);
    let span = analysis_span(config, &stats)?;
    let series = build_snapshot_series(&scoped, span, config.trajectory_months, SeriesMode::Cumulative)?;
    let nodes: Vec<String> = match &config.trajectory_nodes {
        Some(n) => n.clone(),
        None => series
            .last()
            .and_then(|s| s.cores.top_core().ok())
            .map(|t| t.into_iter().collect())
            .unwrap_or_default(),
    };
    let trajectories = core_rank_trajectories(&series, nodes.iter().map(String::as_str));
    write_atomic(&config.out(TRAJECTORIES), &trajectories_csv(&trajectories))?;
    let emergence = if series.last().is_some_and(|s| !s.network.is_empty()) {
        top_core_emergence(&series)?.period.label()
    } else {
        "n/a".into()
    };
    Ok(format!(
        "{} nodes over {} periods, top core emerges {emergence} -> {}",
        nodes.len(),
        series.len(),
        config.out(TRAJECTORIES).display()
    ))
}

pub fn cmd_buckets(config: &PipelineConfig) -> Result<String> {
    let statements = read_statements(config)?;
    let stats = read_corpus_stats(config)?;
    let scoped = network_statements(config, &statements);
    let span = analysis_span(config, &stats)?;
    let series = build_snapshot_series(&scoped, span, config.bucket_months, SeriesMode::PerPeriod)?;
    let buckets = buckets_from_series(&series, config.bucket_threshold);
    write_atomic(&config.out(BUCKETS), &buckets_csv(&buckets))?;
    let sizes: Vec<String> = buckets.iter().map(|b| b.members.len().to_string()).collect();
    Ok(format!(
        "{} buckets (core > {}), sizes [{}] -> {}",
        buckets.len(),
        config.bucket_threshold,
        sizes.join(", "),
        config.out(BUCKETS).display()
    ))
}

pub fn cmd_overlap(config: &PipelineConfig) -> Result<String> {
    let text = read_intermediate(config, BUCKETS, "buckets")?;
    let parsed = parse_buckets_csv(text.as_bytes()).map_err(|e| corrupt(config.out(BUCKETS), e))?;
    if parsed.len() < 2 {
        return Err(Error::TooFewBuckets(parsed.len()));
    }
    let metric = config.overlap_metric;
    let points = parsed
        .windows(2)
        .map(|w| {
            let (percent, empty) = crate::temporal::overlap_percent(&w[0].1, &w[1].1, metric);
            crate::temporal::OverlapPoint {
                from: w[0].0.clone(),
                to: w[1].0.clone(),
                percent,
                empty,
            }
        })
        .collect();
    let series = OverlapSeries { metric, points };
    write_atomic(&config.out(OVERLAP), &overlap_csv(&series))?;
    let percents: Vec<String> = series.percents().iter().map(|p| format!("{p:.1}")).collect();
    Ok(format!(
        "overlap [{}] -> {}",
        percents.join(", "),
        config.out(OVERLAP).display()
    ))
}

pub fn cmd_daily_counts(config: &PipelineConfig, source: Option<&str>) -> Result<String> {
    let statements = read_statements(config)?;
    let stats = read_corpus_stats(config)?;
    let sources: Vec<&str> = match source {
        Some(s) => vec![s],
        None => stats.sources.keys().map(String::as_str).collect(),
    };
    let mut lines = Vec::new();
    for s in sources {
        let counts = daily_edge_counts(&statements, &stats, s)?;
        let summary = distribution_summary(&counts);
        let path = config.out(&daily_counts_file(s));
        write_atomic(&path, &daily_counts_csv(&counts))?;
        lines.push(format!(
            "{s}: {} days, {} events, median {}, max {} -> {}",
            summary.days,
            summary.total_events,
            summary.median,
            summary.max,
            path.display()
        ));
    }
    Ok(lines.join("\n"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layers_and_defaults() {
        let flags = ConfigLayer {
            bucket_threshold: Some(3),
            ..Default::default()
        };
        let file = ConfigLayer {
            bucket_threshold: Some(9),
            bucket_months: Some(12),
            ..Default::default()
        };
        let c = PipelineConfig::resolve(flags.over(file)).unwrap();
        assert_eq!((c.bucket_threshold, c.bucket_months, c.trajectory_months), (3, 12, 1));
        assert!(c.quote_trigger && !c.require_both);
        assert_eq!(c.output_dir, PathBuf::from(DEFAULT_OUTPUT_DIR));
    }

    #[test]
    fn invalid_configs() {
        let both = ConfigLayer {
            gazetteer: Some("a".into()),
            external_tags: Some("b".into()),
            ..Default::default()
        };
        assert!(matches!(PipelineConfig::resolve(both), Err(Error::Config(_))));
        let zero = ConfigLayer {
            bucket_months: Some(0),
            ..Default::default()
        };
        assert!(PipelineConfig::resolve(zero).is_err());
        let conflict = ConfigLayer {
            require_both: Some(true),
            quote_trigger: Some(false),
            ..Default::default()
        };
        assert!(PipelineConfig::resolve(conflict).is_err());
    }

    #[test]
    fn config_file_paths_are_relative_to_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "corpus = \"data/c.jsonl\"\nbucket_threshold = 5\noverlap_metric = \"containment\"\n").unwrap();
        let layer = ConfigLayer::load(&path).unwrap();
        assert_eq!(layer.corpus, Some(dir.path().join("data/c.jsonl")));
        assert_eq!(layer.overlap_metric, Some(OverlapMetric::Containment));

        fs::write(&path, "no_such_key = 1\n").unwrap();
        assert!(matches!(ConfigLayer::load(&path), Err(Error::Config(_))));
    }

    #[test]
    fn slugs() {
        assert_eq!(source_slug("The Daily Star"), "the-daily-star");
        assert_eq!(source_slug("  New-Age!! "), "new-age");
        assert_eq!(source_slug("???"), "source");
    }

    #[test]
    fn buckets_csv_round_trip_keeps_empty_buckets() {
        use crate::temporal::{Period, YearMonth};
        let period = |i: i32| Period {
            index: i as usize + 1,
            start: YearMonth::new(2010, 1).plus(6 * i),
            end: YearMonth::new(2010, 6).plus(6 * i),
            partial: false,
        };
        let buckets = vec![
            HierarchyBucket { period: period(0), threshold: 7, members: ["A".to_string(), "B, Jr".to_string()].into() },
            HierarchyBucket { period: period(1), threshold: 7, members: BTreeSet::new() },
        ];
        let parsed = parse_buckets_csv(&buckets_csv(&buckets)).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].1, buckets[0].members);
        assert!(parsed[1].1.is_empty());
        assert_eq!(parsed[1].0, "2010-07/2010-12");
    }

    #[test]
    fn atomic_write_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/out.csv");
        write_atomic(&path, b"x\n").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"x\n");
        assert!(!dir.path().join("nested/out.csv.tmp").exists());
    }
}
