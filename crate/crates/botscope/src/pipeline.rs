//! End-to-end orchestration: ingest, window filter, activity gate,
//! threshold derivation, classification, retweet graph, PageRank, threat
//! assessment, and report files.
//!
//! Reports are written only after every stage has succeeded, so a failing
//! run leaves no partial outputs behind. A lock file guards the output
//! directory against concurrent runs.

use crate::graph::{
    assess_threat, build_retweet_graph, pagerank, PageRankConfig, PageRankResult, RankedReport,
    RetweetGraph, Verdict, DEFAULT_THREAT_PERCENTILE,
};
use crate::ingest::{
    filter_window, merge_corpora, parse_corpus_files, Corpus, CorpusFormat, IngestOptions,
    TrackingWindow,
};
use crate::metrics::{
    compute_user_metrics, derive_thresholds, select_highly_active, DetectionThresholds,
    MetricsError, TextNormalization, ThresholdOverrides, UserMetrics, DEFAULT_FFR_THRESHOLD,
    DEFAULT_TFQ_THRESHOLD,
};
use chrono::SecondsFormat;
use serde::{Deserialize, Serialize};
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;
pub const LOCK_FILE_NAME: &str = ".botscope.lock";

/// An error tagged with the pipeline stage that raised it.
#[derive(Debug, Error)]
#[error("stage {stage}: {source}")]
pub struct PipelineError {
    pub stage: &'static str,
    #[source]
    pub source: Box<dyn std::error::Error + Send + Sync>,
}

impl PipelineError {
    pub fn new<E>(stage: &'static str, source: E) -> Self
    where
        E: Into<Box<dyn std::error::Error + Send + Sync>>,
    {
        Self {
            stage,
            source: source.into(),
        }
    }
}

/// Resolved run options (defaults already folded in by the caller).
#[derive(Debug, Clone)]
pub struct PipelineOptions {
    /// Tracking window; `None` restricts nothing and keeps the data extent.
    pub window: Option<TrackingWindow>,
    pub overrides: ThresholdOverrides,
    pub normalization: TextNormalization,
    pub infer_rt_prefix: bool,
    pub pagerank: PageRankConfig,
    pub threat_percentile: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            window: None,
            overrides: ThresholdOverrides::default(),
            normalization: TextNormalization::default(),
            infer_rt_prefix: false,
            pagerank: PageRankConfig::default(),
            threat_percentile: DEFAULT_THREAT_PERCENTILE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryThresholds {
    /// `null` when no account passed the activity gate and no override was
    /// given, i.e. there was nothing to derive the threshold from.
    pub tu_threshold: Option<f64>,
    pub tfq_threshold: f64,
    pub ffr_threshold: f64,
    pub activity_min_tweets: u64,
    pub activity_window_days: u32,
    pub damping: f64,
    pub threat_percentile: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub threat: u64,
    pub harmless: u64,
    pub not_flagged: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryWindow {
    pub start: String,
    pub end: String,
    pub duration_hours: f64,
}

/// Headline numbers of one pipeline run, serialized as `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub schema_version: u32,
    pub total_users: u64,
    pub total_tweets: u64,
    pub highly_active_count: u64,
    pub flagged_count: u64,
    /// `100 * flagged / highly_active`, rounded to one decimal.
    pub flagged_share_percent: f64,
    pub flagged_tweet_count: u64,
    pub thresholds: SummaryThresholds,
    pub verdicts: VerdictCounts,
    pub window: SummaryWindow,
}

/// Everything a run produces, for callers that want more than the summary.
#[derive(Debug)]
pub struct PipelineOutcome {
    pub corpus: Corpus,
    pub thresholds: Option<DetectionThresholds>,
    pub metrics: Vec<UserMetrics>,
    pub graph: RetweetGraph,
    pub scores: Option<PageRankResult>,
    /// One report per evaluated (highly active) account, highest PageRank
    /// first.
    pub reports: Vec<RankedReport>,
    pub summary: PipelineSummary,
}

fn round1(value: f64) -> f64 {
    (value * 10.0).round() / 10.0
}

/// Parse, merge, window-filter, and optionally promote `RT @name:` texts.
pub fn ingest_stage(
    inputs: &[PathBuf],
    options: &PipelineOptions,
) -> Result<Corpus, PipelineError> {
    Ok(ingest_stage_with_reports(inputs, options)?.0)
}

/// [`ingest_stage`] variant that also returns the per-file parse
/// diagnostics (line and malformed-line counts).
pub fn ingest_stage_with_reports(
    inputs: &[PathBuf],
    options: &PipelineOptions,
) -> Result<(Corpus, Vec<crate::ingest::ParsedCorpus>), PipelineError> {
    let ingest_options = IngestOptions {
        infer_rt_prefix: false,
    };
    let (merged, reports) = parse_corpus_files(inputs, CorpusFormat::Ndjson, ingest_options)
        .map_err(|e| PipelineError::new("ingest", e))?;
    let mut corpus = match options.window {
        Some(window) => filter_window(merged, window),
        None => merged,
    };
    if options.infer_rt_prefix {
        corpus.infer_retweets_from_prefix();
    }
    Ok((corpus, reports))
}

/// Run detection, graph construction, ranking, and assessment over an
/// already ingested corpus.
pub fn analyze_corpus(
    corpus: Corpus,
    options: &PipelineOptions,
) -> Result<PipelineOutcome, PipelineError> {
    let active = select_highly_active(
        &corpus,
        options.overrides.activity_min_tweets(),
        options.overrides.activity_window_days(),
    );

    let thresholds = if active.is_empty() {
        None
    } else {
        match derive_thresholds(&corpus, &active, &options.overrides, options.normalization) {
            Ok(t) => Some(t),
            Err(MetricsError::NoActiveTweets) => None,
            Err(e) => return Err(PipelineError::new("derive-thresholds", e)),
        }
    };

    let metrics = match &thresholds {
        Some(t) => compute_user_metrics(&corpus, &active, t, options.normalization),
        None => Vec::new(),
    };

    let graph = build_retweet_graph(&corpus);
    let scores = if graph.is_empty() {
        None
    } else {
        Some(
            pagerank(&graph, options.pagerank).map_err(|e| PipelineError::new("rank", e))?,
        )
    };

    let mut reports = Vec::with_capacity(metrics.len());
    if let Some(scores) = &scores {
        for m in &metrics {
            reports.push(
                assess_threat(m, scores, options.threat_percentile)
                    .map_err(|e| PipelineError::new("report", e))?,
            );
        }
    }
    reports.sort_by(|a, b| b.pagerank.total_cmp(&a.pagerank).then(a.user_id.cmp(&b.user_id)));

    let flagged_count = metrics.iter().filter(|m| m.bot_like).count() as u64;
    let flagged_tweet_count = metrics
        .iter()
        .filter(|m| m.bot_like)
        .map(|m| m.tweet_count)
        .sum();
    let highly_active_count = active.len() as u64;
    let mut verdicts = VerdictCounts::default();
    for report in &reports {
        match report.verdict {
            Verdict::Threat => verdicts.threat += 1,
            Verdict::Harmless => verdicts.harmless += 1,
            Verdict::NotFlagged => verdicts.not_flagged += 1,
        }
    }

    let window = corpus.window();
    let summary = PipelineSummary {
        schema_version: SUMMARY_SCHEMA_VERSION,
        total_users: corpus.user_count(),
        total_tweets: corpus.tweet_count(),
        highly_active_count,
        flagged_count,
        flagged_share_percent: if highly_active_count == 0 {
            0.0
        } else {
            round1(100.0 * flagged_count as f64 / highly_active_count as f64)
        },
        flagged_tweet_count,
        thresholds: SummaryThresholds {
            tu_threshold: thresholds.as_ref().map(|t| t.tu_threshold),
            tfq_threshold: thresholds
                .as_ref()
                .map(|t| t.tfq_threshold)
                .or(options.overrides.tfq_threshold)
                .unwrap_or(DEFAULT_TFQ_THRESHOLD),
            ffr_threshold: thresholds
                .as_ref()
                .map(|t| t.ffr_threshold)
                .or(options.overrides.ffr_threshold)
                .unwrap_or(DEFAULT_FFR_THRESHOLD),
            activity_min_tweets: options.overrides.activity_min_tweets(),
            activity_window_days: options.overrides.activity_window_days(),
            damping: options.pagerank.damping,
            threat_percentile: options.threat_percentile,
        },
        verdicts,
        window: SummaryWindow {
            start: window.start().to_rfc3339_opts(SecondsFormat::Secs, true),
            end: window.end().to_rfc3339_opts(SecondsFormat::Secs, true),
            duration_hours: window.duration_hours(),
        },
    };

    Ok(PipelineOutcome {
        corpus,
        thresholds,
        metrics,
        graph,
        scores,
        reports,
        summary,
    })
}

/// Execute the whole pipeline over archive files and write `metrics.csv`,
/// `ranked.csv`, `graph_edges.csv`, and `summary.json` into `out_dir`.
pub fn run_pipeline(
    inputs: &[PathBuf],
    options: &PipelineOptions,
    out_dir: &Path,
) -> Result<PipelineSummary, PipelineError> {
    let out = OutputDir::prepare(out_dir)?;
    let corpus = ingest_stage(inputs, options)?;
    let outcome = analyze_corpus(corpus, options)?;
    out.write_reports(&outcome)?;
    Ok(outcome.summary)
}

/// Output file name paired with the writer that produces its bytes.
pub type NamedWriter<'a> = (&'a str, &'a dyn Fn(&mut dyn Write) -> io::Result<()>);

/// Output directory handle holding the lock for the duration of a run and
/// rolling back partially written files on failure.
pub struct OutputDir {
    dir: PathBuf,
    _lock: DirLock,
}

impl OutputDir {
    pub fn prepare(dir: &Path) -> Result<Self, PipelineError> {
        fs::create_dir_all(dir)
            .map_err(|e| PipelineError::new("output", format!("cannot create {}: {e}", dir.display())))?;
        let lock = DirLock::acquire(dir).map_err(|e| PipelineError::new("output", e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            _lock: lock,
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn join(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Write the four standard report files for a finished run.
    pub fn write_reports(&self, outcome: &PipelineOutcome) -> Result<(), PipelineError> {
        self.write_files(&[
            ("metrics.csv", &|out| {
                write_metrics_csv(&outcome.corpus, &outcome.metrics, out)
            }),
            ("ranked.csv", &|out| {
                write_ranked_csv(&outcome.reports, &outcome.graph, out)
            }),
            ("graph_edges.csv", &|out| outcome.graph.write_edges_csv(out)),
            ("summary.json", &|out| {
                write_summary_json(&outcome.summary, out)
            }),
        ])
    }

    /// Write a set of files, removing every one of them if any write fails.
    pub fn write_files(&self, files: &[NamedWriter<'_>]) -> Result<(), PipelineError> {
        let mut written: Vec<PathBuf> = Vec::new();
        for (name, write) in files {
            let path = self.join(name);
            let result = File::create(&path)
                .map(io::BufWriter::new)
                .and_then(|mut out| write(&mut out).and_then(|()| out.flush()));
            written.push(path.clone());
            if let Err(e) = result {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                return Err(PipelineError::new(
                    "output",
                    format!("cannot write {}: {e}", path.display()),
                ));
            }
        }
        Ok(())
    }
}

struct DirLock {
    path: PathBuf,
}

impl DirLock {
    fn acquire(dir: &Path) -> Result<Self, String> {
        let path = dir.join(LOCK_FILE_NAME);
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(Self { path }),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(format!(
                "output directory {} is locked by another run ({} exists)",
                dir.display(),
                LOCK_FILE_NAME
            )),
            Err(e) => Err(format!("cannot lock {}: {e}", dir.display())),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn fmt_f64(value: f64) -> String {
    value.to_string()
}

/// Per-account metrics table. Rows are in user-id order; an undefined
/// friends-followers ratio is an empty field.
pub fn write_metrics_csv<W: Write>(
    corpus: &Corpus,
    metrics: &[UserMetrics],
    out: W,
) -> io::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record([
        "user_id",
        "screen_name",
        "tweet_count",
        "tu",
        "tfq",
        "ffr",
        "tu_flag",
        "tfq_flag",
        "ffr_flag",
        "bot_like",
    ])?;
    for m in metrics {
        let screen_name = corpus
            .user(m.user_id)
            .map(|p| p.screen_name.clone())
            .unwrap_or_default();
        writer.write_record([
            m.user_id.to_string(),
            screen_name,
            m.tweet_count.to_string(),
            fmt_f64(m.tu),
            fmt_f64(m.tfq),
            m.ffr.map(fmt_f64).unwrap_or_default(),
            m.tu_flag.to_string(),
            m.tfq_flag.to_string(),
            m.ffr_flag.to_string(),
            m.bot_like.to_string(),
        ])?;
    }
    writer.flush()
}

/// Influence ranking table for the evaluated accounts, highest PageRank
/// first. Self-retweets never enter the graph edges, so their count is
/// surfaced here.
pub fn write_ranked_csv<W: Write>(
    reports: &[RankedReport],
    graph: &RetweetGraph,
    out: W,
) -> io::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record([
        "user_id",
        "bot_like",
        "pagerank",
        "percentile",
        "verdict",
        "self_retweets",
    ])?;
    for r in reports {
        writer.write_record([
            r.user_id.to_string(),
            r.bot_like.to_string(),
            fmt_f64(r.pagerank),
            fmt_f64(r.percentile),
            r.verdict.as_str().to_string(),
            graph.self_retweet_count(r.user_id).to_string(),
        ])?;
    }
    writer.flush()
}

pub fn write_summary_json<W: Write>(summary: &PipelineSummary, mut out: W) -> io::Result<()> {
    let text = serde_json::to_string_pretty(summary)?;
    out.write_all(text.as_bytes())?;
    out.write_all(b"\n")
}

/// Merge pre-parsed corpora and analyze them; the in-memory counterpart of
/// [`run_pipeline`] for callers that already hold a corpus.
pub fn analyze_merged(
    corpora: Vec<Corpus>,
    options: &PipelineOptions,
) -> Result<PipelineOutcome, PipelineError> {
    let merged = merge_corpora(corpora);
    let mut corpus = match options.window {
        Some(window) => filter_window(merged, window),
        None => merged,
    };
    if options.infer_rt_prefix {
        corpus.infer_retweets_from_prefix();
    }
    analyze_corpus(corpus, options)
}
