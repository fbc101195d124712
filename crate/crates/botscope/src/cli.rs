//! Command-line front end. Each subcommand wraps one pipeline stage with
//! file inputs and outputs so stages can be run independently and
//! checkpointed; `report` runs everything end to end.

use crate::config::FileConfig;
use crate::graph::{build_retweet_graph, pagerank, PageRankConfig};
use crate::ingest::Corpus;
use crate::metrics::{
    compute_user_metrics, derive_thresholds, select_highly_active, DetectionThresholds,
    MetricsError, ThresholdOverrides,
};
use crate::pipeline::{
    analyze_corpus, ingest_stage_with_reports, write_metrics_csv, write_summary_json, OutputDir,
    PipelineError, PipelineOptions,
};
use crate::synth::{evaluate_detector, generate_corpus, GroundTruth};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "botscope",
    version,
    about = "Detect bot-like accounts in archived tweet corpora and rank their influence"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, merge, and window-filter archives into a corpus checkpoint
    Ingest(IngestCmd),
    /// Select highly active accounts, derive thresholds, and classify
    Detect(DetectCmd),
    /// Build the directed retweet network edge list
    Graph(GraphCmd),
    /// Compute PageRank scores and percentiles over the retweet network
    Rank(RankCmd),
    /// Run the full pipeline and write all report files
    Report(ReportCmd),
    /// Generate a seeded synthetic corpus with ground-truth labels
    Synth(SynthCmd),
    /// Score the detector against ground-truth labels
    Eval(EvalCmd),
}

#[derive(Args)]
struct InputArgs {
    /// Input archive files (.ndjson, optionally .gz-compressed)
    #[arg(long = "input", required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Key-value config file (falls back to $BOTSCOPE_CONFIG)
    #[arg(long, env = "BOTSCOPE_CONFIG")]
    config: Option<PathBuf>,
    /// Also treat texts starting with "RT @name:" as retweets
    #[arg(long)]
    infer_rt_prefix: bool,
}

#[derive(Args, Default)]
struct DetectFlags {
    /// Override the derived tweet-uniqueness threshold
    #[arg(long)]
    tu_threshold: Option<f64>,
    /// Tweets-per-hour threshold
    #[arg(long)]
    tfq_threshold: Option<f64>,
    /// Friends-followers-ratio threshold
    #[arg(long)]
    ffr_threshold: Option<f64>,
    /// Minimum tweets within the activity window to count as highly active
    #[arg(long = "min-tweets")]
    min_tweets: Option<u64>,
    /// Length of the sliding activity window in days
    #[arg(long)]
    activity_window_days: Option<u32>,
}

#[derive(Args, Default)]
struct RankFlags {
    /// PageRank damping factor
    #[arg(long)]
    damping: Option<f64>,
    /// L1 convergence tolerance
    #[arg(long = "tol")]
    tolerance: Option<f64>,
    /// Iteration budget
    #[arg(long = "max-iter")]
    max_iterations: Option<u32>,
    /// Influence percentile at which a flagged account becomes a threat
    #[arg(long)]
    threat_percentile: Option<f64>,
}

#[derive(Args)]
struct IngestCmd {
    #[command(flatten)]
    input: InputArgs,
    /// Output directory for the checkpoint
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DetectCmd {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    detect: DetectFlags,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GraphCmd {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RankCmd {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    rank: RankFlags,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportCmd {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    detect: DetectFlags,
    #[command(flatten)]
    rank: RankFlags,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthCmd {
    /// Key-value config file with a [synth] section
    #[arg(long, env = "BOTSCOPE_CONFIG")]
    config: Option<PathBuf>,
    /// Generator seed (overrides the config)
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalCmd {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    detect: DetectFlags,
    /// Ground-truth labels CSV (user_id,label)
    #[arg(long)]
    labels: PathBuf,
    /// Optional directory for eval.json
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("botscope: error at {err}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig, PipelineError> {
    match path {
        Some(path) => FileConfig::load(path).map_err(|e| PipelineError::new("config", e)),
        None => Ok(FileConfig::default()),
    }
}

/// Fold file config and CLI flags into resolved pipeline options. Flags win
/// over the file; the file wins over defaults.
fn resolve_options(
    config: &FileConfig,
    detect: &DetectFlags,
    rank: &RankFlags,
    infer_rt_prefix: bool,
) -> PipelineOptions {
    let file_overrides = config.threshold_overrides();
    let defaults = PageRankConfig::default();
    PipelineOptions {
        window: config.window,
        overrides: ThresholdOverrides {
            tu_threshold: detect.tu_threshold.or(file_overrides.tu_threshold),
            tfq_threshold: detect.tfq_threshold.or(file_overrides.tfq_threshold),
            ffr_threshold: detect.ffr_threshold.or(file_overrides.ffr_threshold),
            activity_min_tweets: detect.min_tweets.or(file_overrides.activity_min_tweets),
            activity_window_days: detect
                .activity_window_days
                .or(file_overrides.activity_window_days),
        },
        normalization: config.detect.tu_normalization.unwrap_or_default(),
        infer_rt_prefix: infer_rt_prefix || config.detect.infer_rt_prefix.unwrap_or(false),
        pagerank: PageRankConfig {
            damping: rank
                .damping
                .or(config.rank.damping)
                .unwrap_or(defaults.damping),
            tolerance: rank
                .tolerance
                .or(config.rank.tolerance)
                .unwrap_or(defaults.tolerance),
            max_iterations: rank
                .max_iterations
                .or(config.rank.max_iterations)
                .unwrap_or(defaults.max_iterations),
        },
        threat_percentile: rank
            .threat_percentile
            .or(config.rank.threat_percentile)
            .unwrap_or(crate::graph::DEFAULT_THREAT_PERCENTILE),
    }
}

/// Thresholds for subcommands that classify outside the full pipeline. An
/// empty active set leaves nothing to derive from (and nothing to flag), so
/// the uniqueness threshold falls back to 1.0.
fn resolve_thresholds(
    corpus: &Corpus,
    options: &PipelineOptions,
) -> Result<(std::collections::BTreeSet<u64>, DetectionThresholds), PipelineError> {
    let active = select_highly_active(
        corpus,
        options.overrides.activity_min_tweets(),
        options.overrides.activity_window_days(),
    );
    let thresholds =
        match derive_thresholds(corpus, &active, &options.overrides, options.normalization) {
            Ok(t) => t,
            Err(MetricsError::NoActiveTweets) => {
                let overrides = ThresholdOverrides {
                    tu_threshold: Some(1.0),
                    ..options.overrides
                };
                derive_thresholds(corpus, &active, &overrides, options.normalization)
                    .map_err(|e| PipelineError::new("derive-thresholds", e))?
            }
            Err(e) => return Err(PipelineError::new("derive-thresholds", e)),
        };
    Ok((active, thresholds))
}

fn execute(command: Command) -> Result<(), PipelineError> {
    match command {
        Command::Ingest(cmd) => {
            let config = load_config(&cmd.input.config)?;
            let options = resolve_options(
                &config,
                &DetectFlags::default(),
                &RankFlags::default(),
                cmd.input.infer_rt_prefix,
            );
            let out = OutputDir::prepare(&cmd.out)?;
            let (corpus, reports) = ingest_stage_with_reports(&cmd.input.input, &options)?;
            let malformed: u64 = reports.iter().map(|r| r.malformed_lines).sum();
            let duplicates: u64 = reports.iter().map(|r| r.duplicate_tweet_ids).sum();
            out.write_files(&[("corpus.ndjson", &|w| corpus.write_ndjson(w))])?;
            println!("ingested {} files", cmd.input.input.len());
            println!("tweets:          {}", corpus.tweet_count());
            println!("users:           {}", corpus.user_count());
            println!("malformed lines: {malformed}");
            println!("duplicates:      {duplicates}");
            println!("checkpoint:      {}", out.join("corpus.ndjson").display());
            Ok(())
        }
        Command::Detect(cmd) => {
            let config = load_config(&cmd.input.config)?;
            let options = resolve_options(
                &config,
                &cmd.detect,
                &RankFlags::default(),
                cmd.input.infer_rt_prefix,
            );
            let out = OutputDir::prepare(&cmd.out)?;
            let corpus = crate::pipeline::ingest_stage(&cmd.input.input, &options)?;
            let (active, thresholds) = resolve_thresholds(&corpus, &options)?;
            let metrics =
                compute_user_metrics(&corpus, &active, &thresholds, options.normalization);
            out.write_files(&[("metrics.csv", &|w| write_metrics_csv(&corpus, &metrics, w))])?;
            let flagged = metrics.iter().filter(|m| m.bot_like).count();
            println!("highly active:   {}", active.len());
            println!("flagged:         {flagged}");
            println!("tu threshold:    {}", thresholds.tu_threshold);
            println!("metrics:         {}", out.join("metrics.csv").display());
            Ok(())
        }
        Command::Graph(cmd) => {
            let config = load_config(&cmd.input.config)?;
            let options = resolve_options(
                &config,
                &DetectFlags::default(),
                &RankFlags::default(),
                cmd.input.infer_rt_prefix,
            );
            let out = OutputDir::prepare(&cmd.out)?;
            let corpus = crate::pipeline::ingest_stage(&cmd.input.input, &options)?;
            let graph = build_retweet_graph(&corpus);
            out.write_files(&[("graph_edges.csv", &|w| graph.write_edges_csv(w))])?;
            println!("nodes:           {}", graph.node_count());
            println!("edges:           {}", graph.edge_count());
            println!("edge list:       {}", out.join("graph_edges.csv").display());
            Ok(())
        }
        Command::Rank(cmd) => {
            let config = load_config(&cmd.input.config)?;
            let options = resolve_options(
                &config,
                &DetectFlags::default(),
                &cmd.rank,
                cmd.input.infer_rt_prefix,
            );
            let out = OutputDir::prepare(&cmd.out)?;
            let corpus = crate::pipeline::ingest_stage(&cmd.input.input, &options)?;
            let graph = build_retweet_graph(&corpus);
            let scores =
                pagerank(&graph, options.pagerank).map_err(|e| PipelineError::new("rank", e))?;
            out.write_files(&[("pagerank.csv", &|w| scores.write_scores_csv(w))])?;
            println!("nodes:           {}", scores.len());
            println!("iterations:      {}", scores.iterations);
            println!("residual:        {:e}", scores.residual);
            println!("converged:       {}", scores.converged);
            println!("scores:          {}", out.join("pagerank.csv").display());
            Ok(())
        }
        Command::Report(cmd) => {
            let config = load_config(&cmd.input.config)?;
            let options =
                resolve_options(&config, &cmd.detect, &cmd.rank, cmd.input.infer_rt_prefix);
            let out = OutputDir::prepare(&cmd.out)?;
            let corpus = crate::pipeline::ingest_stage(&cmd.input.input, &options)?;
            let outcome = analyze_corpus(corpus, &options)?;
            out.write_reports(&outcome)?;
            let s = &outcome.summary;
            println!("total users:     {}", s.total_users);
            println!("total tweets:    {}", s.total_tweets);
            println!("highly active:   {}", s.highly_active_count);
            println!(
                "flagged:         {} ({}% of active)",
                s.flagged_count, s.flagged_share_percent
            );
            println!("flagged tweets:  {}", s.flagged_tweet_count);
            println!(
                "verdicts:        {} threat, {} harmless, {} not flagged",
                s.verdicts.threat, s.verdicts.harmless, s.verdicts.not_flagged
            );
            println!("reports:         {}", out.path().display());
            Ok(())
        }
        Command::Synth(cmd) => {
            let config = load_config(&cmd.config)?;
            let mut synth_config = config.synth.unwrap_or_default();
            if let Some(seed) = cmd.seed {
                synth_config.seed = seed;
            }
            let out = OutputDir::prepare(&cmd.out)?;
            let (corpus, truth) =
                generate_corpus(&synth_config).map_err(|e| PipelineError::new("synth", e))?;
            out.write_files(&[
                ("corpus.ndjson", &|w| corpus.write_ndjson(w)),
                ("labels.csv", &|w| truth.write_csv(w)),
            ])?;
            println!("seed:            {}", synth_config.seed);
            println!("accounts:        {}", truth.len());
            println!("bot accounts:    {}", truth.bot_count());
            println!("tweets:          {}", corpus.tweet_count());
            println!("corpus:          {}", out.join("corpus.ndjson").display());
            println!("labels:          {}", out.join("labels.csv").display());
            Ok(())
        }
        Command::Eval(cmd) => {
            let config = load_config(&cmd.input.config)?;
            let options = resolve_options(
                &config,
                &cmd.detect,
                &RankFlags::default(),
                cmd.input.infer_rt_prefix,
            );
            let corpus = crate::pipeline::ingest_stage(&cmd.input.input, &options)?;
            let truth = GroundTruth::read_csv_file(&cmd.labels)
                .map_err(|e| PipelineError::new("eval", e))?;
            let (_, thresholds) = resolve_thresholds(&corpus, &options)?;
            let matrix = evaluate_detector(&corpus, &truth, &thresholds, options.normalization)
                .map_err(|e| PipelineError::new("eval", e))?;
            let json =
                serde_json::to_string(&matrix).map_err(|e| PipelineError::new("eval", e))?;
            println!("{json}");
            if let Some(dir) = &cmd.out {
                let out = OutputDir::prepare(dir)?;
                out.write_files(&[("eval.json", &|w| {
                    let mut w = w;
                    serde_json::to_writer_pretty(&mut w, &matrix)
                        .map_err(io_from_json)
                        .and_then(|()| std::io::Write::write_all(&mut w, b"\n"))
                })])?;
            }
            Ok(())
        }
    }
}

fn io_from_json(err: serde_json::Error) -> std::io::Error {
    std::io::Error::other(err)
}

/// Shared summary writer so library users can emit the same JSON the CLI
/// does.
pub fn print_summary_json(
    summary: &crate::pipeline::PipelineSummary,
) -> Result<(), PipelineError> {
    let mut stdout = std::io::stdout().lock();
    write_summary_json(summary, &mut stdout).map_err(|e| PipelineError::new("output", e))
}
