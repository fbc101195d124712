//! Corpus-driven detection of bot-like accounts in archived tweet data.
//!
//! The toolkit ingests newline-delimited tweet archives, applies a
//! three-metric sampling procedure (tweet uniqueness, tweet frequency,
//! friends-followers ratio) to highly active accounts, then ranks flagged
//! accounts by PageRank influence over the directed retweet network and
//! classifies each as threat or harmless.
//!
//! Start with the runnable examples:
//!
//! ```bash
//! cargo run -p botscope --example synth_corpus
//! cargo run -p botscope --example ingest_merge
//! cargo run -p botscope --example detect_bots
//! cargo run -p botscope --example rank_influence
//! cargo run -p botscope --example evaluate_detector
//! cargo run -p botscope --example full_pipeline
//! ```
//!
//! or with the `botscope` binary, which exposes the same pipeline as
//! checkpointable subcommands (`ingest`, `detect`, `graph`, `rank`,
//! `report`, `synth`, `eval`).

pub mod cli;
pub mod config;
pub mod graph;
pub mod ingest;
pub mod metrics;
pub mod pipeline;
pub mod synth;

pub use config::FileConfig;
pub use graph::{
    build_retweet_graph, pagerank, PageRankConfig, PageRankResult, RankedReport, RetweetGraph,
    Verdict,
};
pub use ingest::{
    filter_window, merge_corpora, parse_corpus_file, Corpus, CorpusFormat, IngestOptions,
    TrackingWindow, TweetKind, TweetRecord, UserProfile,
};
pub use metrics::{
    classify, derive_thresholds, select_highly_active, DetectionThresholds, TextNormalization,
    ThresholdOverrides, UserMetrics,
};
pub use pipeline::{run_pipeline, PipelineOptions, PipelineSummary};
pub use synth::{evaluate_detector, generate_corpus, ConfusionMatrix, GroundTruth, SynthConfig};
