//! The directed retweet network and PageRank-based influence ranking.
//!
//! Edges point from the retweeter to the retweeted author, so rank flows
//! toward amplified accounts. Transitions are weighted by retweet counts;
//! dangling nodes distribute their rank uniformly over all nodes.

use crate::ingest::{Corpus, UserId};
use crate::metrics::UserMetrics;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use std::io::{self, Write};
use thiserror::Error;

pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITERATIONS: u32 = 200;
pub const DEFAULT_THREAT_PERCENTILE: f64 = 90.0;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("pagerank requires a non-empty graph")]
    EmptyGraph,
    #[error("damping factor must lie strictly between 0 and 1, got {0}")]
    InvalidDamping(f64),
    #[error("user {0} has no pagerank score")]
    UnknownUser(UserId),
}

/// Directed multigraph of retweet acts, aggregated to weighted edges.
/// Self-retweets are kept out of the edge set (they would feed rank back
/// into their own source) but remain visible through a per-node counter.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RetweetGraph {
    nodes: Vec<UserId>,
    edges: BTreeMap<(UserId, UserId), u64>,
    self_retweets: BTreeMap<UserId, u64>,
}

impl RetweetGraph {
    /// Build a graph from explicit weighted edges. Zero-weight edges and
    /// self-loops are rejected by debug assertion and skipped.
    pub fn from_edges<I>(nodes: I, edges: impl IntoIterator<Item = (UserId, UserId, u64)>) -> Self
    where
        I: IntoIterator<Item = UserId>,
    {
        let mut edge_map = BTreeMap::new();
        let mut node_set: std::collections::BTreeSet<UserId> = nodes.into_iter().collect();
        for (src, dst, weight) in edges {
            debug_assert!(src != dst && weight > 0);
            if src == dst || weight == 0 {
                continue;
            }
            node_set.insert(src);
            node_set.insert(dst);
            *edge_map.entry((src, dst)).or_insert(0) += weight;
        }
        Self {
            nodes: node_set.into_iter().collect(),
            edges: edge_map,
            self_retweets: BTreeMap::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[UserId] {
        &self.nodes
    }

    pub fn contains_node(&self, user_id: UserId) -> bool {
        self.nodes.binary_search(&user_id).is_ok()
    }

    /// Edges in (source, target) order.
    pub fn edges(&self) -> impl Iterator<Item = (UserId, UserId, u64)> + '_ {
        self.edges.iter().map(|(&(s, t), &w)| (s, t, w))
    }

    pub fn weight(&self, source: UserId, target: UserId) -> u64 {
        self.edges.get(&(source, target)).copied().unwrap_or(0)
    }

    pub fn self_retweet_count(&self, user_id: UserId) -> u64 {
        self.self_retweets.get(&user_id).copied().unwrap_or(0)
    }

    /// `source,target,weight` rows in deterministic edge order.
    pub fn write_edges_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["source", "target", "weight"])?;
        for (source, target, weight) in self.edges() {
            writer.write_record([
                source.to_string(),
                target.to_string(),
                weight.to_string(),
            ])?;
        }
        writer.flush()
    }
}

/// Aggregate every retweet in the corpus into a weighted edge from the
/// retweeter to the retweeted author. Every tweet author and every retweet
/// target becomes a node, so accounts that never retweet still appear as
/// (possibly isolated) vertices.
pub fn build_retweet_graph(corpus: &Corpus) -> RetweetGraph {
    let mut nodes: std::collections::BTreeSet<UserId> = std::collections::BTreeSet::new();
    let mut edges: BTreeMap<(UserId, UserId), u64> = BTreeMap::new();
    let mut self_retweets: BTreeMap<UserId, u64> = BTreeMap::new();
    for tweet in corpus.tweets() {
        nodes.insert(tweet.user_id);
        if let Some(target) = tweet.retweeted_user_id {
            nodes.insert(target);
            if target == tweet.user_id {
                *self_retweets.entry(target).or_insert(0) += 1;
            } else {
                *edges.entry((tweet.user_id, target)).or_insert(0) += 1;
            }
        }
    }
    RetweetGraph {
        nodes: nodes.into_iter().collect(),
        edges,
        self_retweets,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRankConfig {
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: u32,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        Self {
            damping: DEFAULT_DAMPING,
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

/// Converged (or best-effort) PageRank scores over the graph nodes.
#[derive(Debug, Clone)]
pub struct PageRankResult {
    nodes: Vec<UserId>,
    scores: Vec<f64>,
    sorted_scores: Vec<f64>,
    pub damping: f64,
    pub iterations: u32,
    /// L1 change of the final iteration.
    pub residual: f64,
    /// False when `max_iterations` elapsed before the residual dropped
    /// below tolerance; the scores are still the last iterate.
    pub converged: bool,
}

impl PageRankResult {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn score(&self, user_id: UserId) -> Option<f64> {
        let idx = self.nodes.binary_search(&user_id).ok()?;
        Some(self.scores[idx])
    }

    pub fn iter(&self) -> impl Iterator<Item = (UserId, f64)> + '_ {
        self.nodes.iter().copied().zip(self.scores.iter().copied())
    }

    pub fn sum(&self) -> f64 {
        self.scores.iter().sum()
    }

    /// Share of other users scoring strictly below this one, as a value in
    /// [0, 100]. A single-node graph yields 100; ties do not count as below.
    pub fn percentile_rank(&self, user_id: UserId) -> Result<f64, GraphError> {
        let score = self.score(user_id).ok_or(GraphError::UnknownUser(user_id))?;
        let n = self.nodes.len();
        if n == 1 {
            return Ok(100.0);
        }
        let below = self.sorted_scores.partition_point(|&s| s < score);
        Ok(100.0 * below as f64 / (n - 1) as f64)
    }

    /// `user_id,score,percentile` rows, highest score first.
    pub fn write_scores_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["user_id", "score", "percentile"])?;
        let mut rows: Vec<(UserId, f64)> = self.iter().collect();
        rows.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for (user_id, score) in rows {
            let percentile = self.percentile_rank(user_id).expect("own node");
            writer.write_record([
                user_id.to_string(),
                score.to_string(),
                percentile.to_string(),
            ])?;
        }
        writer.flush()
    }
}

/// Power iteration over the weighted, column-stochastic transition
/// structure: each node spreads its rank along out-edges in proportion to
/// edge weight; dangling nodes spread uniformly over all nodes; a uniform
/// teleport with probability `1 - damping` completes the mixture. Iterates
/// until the L1 change drops below tolerance or `max_iterations` is
/// reached. Scores sum to 1 after every iteration.
pub fn pagerank(graph: &RetweetGraph, config: PageRankConfig) -> Result<PageRankResult, GraphError> {
    let n = graph.node_count();
    if n == 0 {
        return Err(GraphError::EmptyGraph);
    }
    if !(config.damping > 0.0 && config.damping < 1.0) {
        return Err(GraphError::InvalidDamping(config.damping));
    }
    let index: HashMap<UserId, usize> = graph
        .nodes
        .iter()
        .enumerate()
        .map(|(i, &id)| (id, i))
        .collect();

    // In-edge lists with transition probabilities, in deterministic order.
    let mut out_weight = vec![0.0f64; n];
    for (src, _, w) in graph.edges() {
        out_weight[index[&src]] += w as f64;
    }
    let mut in_edges: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (src, dst, w) in graph.edges() {
        let s = index[&src];
        in_edges[index[&dst]].push((s, w as f64 / out_weight[s]));
    }
    let dangling: Vec<usize> = (0..n).filter(|&i| out_weight[i] == 0.0).collect();

    let damping = config.damping;
    let uniform = 1.0 / n as f64;
    let mut ranks = vec![uniform; n];
    let mut next = vec![0.0f64; n];
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut converged = false;

    while iterations < config.max_iterations {
        // Sequential sums keep the result bit-identical at any thread count.
        let dangling_mass: f64 = dangling.iter().map(|&i| ranks[i]).sum();
        let base = (1.0 - damping) * uniform + damping * dangling_mass * uniform;
        next.par_iter_mut().enumerate().for_each(|(i, slot)| {
            let inflow: f64 = in_edges[i].iter().map(|&(j, p)| ranks[j] * p).sum();
            *slot = base + damping * inflow;
        });
        residual = ranks
            .iter()
            .zip(next.iter())
            .map(|(a, b)| (a - b).abs())
            .sum();
        std::mem::swap(&mut ranks, &mut next);
        iterations += 1;
        if residual < config.tolerance {
            converged = true;
            break;
        }
    }

    let mut sorted_scores = ranks.clone();
    sorted_scores.sort_by(f64::total_cmp);
    Ok(PageRankResult {
        nodes: graph.nodes.clone(),
        scores: ranks,
        sorted_scores,
        damping,
        iterations,
        residual,
        converged,
    })
}

/// Threat verdict for one account.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Threat,
    Harmless,
    NotFlagged,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Threat => "threat",
            Verdict::Harmless => "harmless",
            Verdict::NotFlagged => "not_flagged",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Influence ranking and verdict for one evaluated account.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedReport {
    pub user_id: UserId,
    pub bot_like: bool,
    pub pagerank: f64,
    pub percentile: f64,
    pub verdict: Verdict,
}

/// Classify a flagged account as a threat when its influence percentile
/// reaches `threat_percentile`; unflagged accounts are never threats.
pub fn assess_threat(
    metrics: &UserMetrics,
    scores: &PageRankResult,
    threat_percentile: f64,
) -> Result<RankedReport, GraphError> {
    let pagerank = scores
        .score(metrics.user_id)
        .ok_or(GraphError::UnknownUser(metrics.user_id))?;
    let percentile = scores.percentile_rank(metrics.user_id)?;
    let verdict = if !metrics.bot_like {
        Verdict::NotFlagged
    } else if percentile >= threat_percentile {
        Verdict::Threat
    } else {
        Verdict::Harmless
    };
    Ok(RankedReport {
        user_id: metrics.user_id,
        bot_like: metrics.bot_like,
        pagerank,
        percentile,
        verdict,
    })
}
