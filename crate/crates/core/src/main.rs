//! statement-net cli entrypoint

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use statement_net::pipeline::{self, ConfigLayer, PipelineConfig, OUTPUT_DIR_ENV};
use statement_net::temporal::OverlapMetric;

#[derive(Debug, Parser)]
#[command(name = "statement-net", version, about = "Statement networks and their core-periphery dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every stage and write the full report bundle with a manifest.
    Run,
    /// Ingest the corpus and write per-source statistics.
    IngestStats,
    /// Tag entities and write the statement sentences.
    Extract,
    /// Build the statement network from extracted statements.
    Network,
    /// k-core decomposition of the cached network.
    Cores,
    /// Core-rank trajectories over cumulative monthly snapshots.
    Trajectories,
    /// Hierarchy buckets of per-period networks.
    Buckets,
    /// Overlap series between consecutive hierarchy buckets.
    Overlap,
    /// Daily edge-event counts per source.
    DailyCounts {
        /// Only this source (default: every source).
        #[arg(long)]
        source: Option<String>,
    },
}

#[derive(Debug, Args)]
struct Overrides {
    /// Line-delimited JSON corpus.
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    /// Gazetteer of person names, one per line.
    #[arg(long, global = true, conflicts_with = "external_tags")]
    gazetteer: Option<PathBuf>,
    /// Directory of `<article_id>.tags` NER sidecars.
    #[arg(long, global = true)]
    external_tags: Option<PathBuf>,
    /// Merge rules: `left<TAB>right[<TAB>merged]` per line.
    #[arg(long, global = true)]
    merge_rules: Option<PathBuf>,
    /// Speech-verb lexicon, one surface form per line.
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,
    /// Require both a speech verb and a quotation mark.
    #[arg(long, global = true)]
    require_both: bool,
    /// Quotation marks alone do not qualify a sentence.
    #[arg(long, global = true)]
    no_quote_trigger: bool,
    /// Search headlines as well as bodies.
    #[arg(long, global = true)]
    include_headline: bool,
    /// Skip malformed corpus lines instead of failing.
    #[arg(long, global = true)]
    skip_malformed: bool,
    /// Restrict network analyses to one source.
    #[arg(long, global = true)]
    network_source: Option<String>,
    /// Months per cumulative trajectory period.
    #[arg(long, global = true)]
    trajectory_months: Option<u32>,
    /// Months per hierarchy-bucket period.
    #[arg(long, global = true)]
    bucket_months: Option<u32>,
    /// Bucket members need a core number above this.
    #[arg(long, global = true)]
    threshold: Option<usize>,
    /// Overlap metric: jaccard or containment.
    #[arg(long, global = true, value_parser = parse_metric)]
    overlap_metric: Option<OverlapMetric>,
    /// Output directory.
    #[arg(long, global = true, env = OUTPUT_DIR_ENV)]
    out: Option<PathBuf>,
}

fn parse_metric(s: &str) -> Result<OverlapMetric, String> {
    match s {
        "jaccard" => Ok(OverlapMetric::Jaccard),
        "containment" => Ok(OverlapMetric::Containment),
        other => Err(format!("unknown overlap metric `{other}`")),
    }
}

impl Overrides {
    fn into_layer(self) -> ConfigLayer {
        let flag = |set: bool| set.then_some(true);
        ConfigLayer {
            corpus: self.corpus,
            gazetteer: self.gazetteer,
            external_tags: self.external_tags,
            merge_rules: self.merge_rules,
            lexicon: self.lexicon,
            require_both: flag(self.require_both),
            quote_trigger: self.no_quote_trigger.then_some(false),
            include_headline: flag(self.include_headline),
            skip_malformed: flag(self.skip_malformed),
            network_source: self.network_source,
            trajectory_months: self.trajectory_months,
            trajectory_nodes: None,
            bucket_months: self.bucket_months,
            bucket_threshold: self.threshold,
            overlap_metric: self.overlap_metric,
            output_dir: self.out,
        }
    }
}

fn run(cli: Cli) -> statement_net::Result<String> {
    let file = match &cli.config {
        Some(path) => ConfigLayer::load(path)?,
        None => ConfigLayer::default(),
    };
    let config = PipelineConfig::resolve(cli.overrides.into_layer().over(file))?;
    log::debug!("resolved config: {config:?}");
    match cli.command {
        Command::Run => {
            let out = pipeline::run_pipeline(&config)?;
            let c = &out.manifest.counts;
            Ok(format!(
                "{} articles, {} sentences, {} statements, {} events, {} nodes, {} simple edges -> {}",
                c.articles_in,
                c.sentences,
                c.statements,
                c.events,
                c.nodes,
                c.simple_edges,
                config.out(pipeline::MANIFEST).display()
            ))
        }
        Command::IngestStats => pipeline::cmd_ingest_stats(&config),
        Command::Extract => pipeline::cmd_extract(&config),
        Command::Network => pipeline::cmd_network(&config),
        Command::Cores => pipeline::cmd_cores(&config),
        Command::Trajectories => pipeline::cmd_trajectories(&config),
        Command::Buckets => pipeline::cmd_buckets(&config),
        Command::Overlap => pipeline::cmd_overlap(&config),
        Command::DailyCounts { source } => pipeline::cmd_daily_counts(&config, source.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
