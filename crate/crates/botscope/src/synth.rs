//! Seeded synthetic corpora with labeled human and bot-archetype accounts,
//! plus a precision/recall harness for the detector.
//!
//! Each account draws its tweet times from a homogeneous Poisson process
//! over the tracking window using a per-account RNG substream, so corpora
//! are byte-identical for a fixed seed regardless of generation order.

use crate::ingest::{profile_from_record, Corpus, TrackingWindow, TweetRecord, UserId};
use crate::metrics::{
    compute_user_metrics, select_highly_active, DetectionThresholds, TextNormalization,
};
use chrono::Duration;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("synthetic corpus config produces zero accounts")]
    NoAccounts,
    #[error("invalid synth config: {0}")]
    InvalidConfig(String),
    #[error("user {0} appears in the corpus but carries no ground-truth label")]
    UnlabeledUser(UserId),
    #[error("cannot read labels from {path}: {source}")]
    LabelsIo {
        path: std::path::PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("unknown account label {0:?}")]
    UnknownLabel(String),
}

/// Ground-truth account category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccountLabel {
    Human,
    /// Posts near-duplicate texts drawn from a small phrase pool.
    Repeater,
    /// Posts at a rate far above the frequency threshold.
    Flooder,
    /// Follows far more accounts than follow it back.
    FollowSpammer,
    /// All three behaviours at once.
    Mixed,
}

impl AccountLabel {
    pub fn is_bot(&self) -> bool {
        !matches!(self, AccountLabel::Human)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            AccountLabel::Human => "human",
            AccountLabel::Repeater => "repeater",
            AccountLabel::Flooder => "flooder",
            AccountLabel::FollowSpammer => "follow_spammer",
            AccountLabel::Mixed => "mixed",
        }
    }

    pub fn parse(s: &str) -> Result<Self, SynthError> {
        Ok(match s {
            "human" => AccountLabel::Human,
            "repeater" => AccountLabel::Repeater,
            "flooder" => AccountLabel::Flooder,
            "follow_spammer" => AccountLabel::FollowSpammer,
            "mixed" => AccountLabel::Mixed,
            other => return Err(SynthError::UnknownLabel(other.to_string())),
        })
    }
}

/// Label per generated account.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruth {
    labels: BTreeMap<UserId, AccountLabel>,
}

impl GroundTruth {
    pub fn label(&self, user_id: UserId) -> Option<AccountLabel> {
        self.labels.get(&user_id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (UserId, AccountLabel)> + '_ {
        self.labels.iter().map(|(&u, &l)| (u, l))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn bot_count(&self) -> usize {
        self.labels.values().filter(|l| l.is_bot()).count()
    }

    /// `user_id,label` rows in user-id order.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["user_id", "label"])?;
        for (user_id, label) in self.iter() {
            writer.write_record([user_id.to_string(), label.as_str().to_string()])?;
        }
        writer.flush()
    }

    pub fn read_csv_file(path: &Path) -> Result<Self, SynthError> {
        let io_err = |source| SynthError::LabelsIo {
            path: path.to_path_buf(),
            source,
        };
        let mut reader = csv::Reader::from_path(path).map_err(io_err)?;
        let mut labels = BTreeMap::new();
        for row in reader.deserialize::<(UserId, String)>() {
            let (user_id, label) = row.map_err(io_err)?;
            labels.insert(user_id, AccountLabel::parse(&label)?);
        }
        Ok(Self { labels })
    }
}

/// Rate parameters for the human cohort.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HumanParams {
    pub count: u32,
    pub tweets_per_day: f64,
    pub retweet_propensity: f64,
}

impl Default for HumanParams {
    fn default() -> Self {
        Self {
            count: 30,
            tweets_per_day: 10.0,
            retweet_propensity: 0.2,
        }
    }
}

/// Behaviour knobs for one bot archetype.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArchetypeParams {
    /// Chance that a tweet repeats a phrase from the account's pool.
    pub duplicate_probability: f64,
    pub tweets_per_day: f64,
    /// Exact friends/followers ratio assigned to the profile.
    pub ffr_target: f64,
    pub retweet_propensity: f64,
    pub phrase_pool_size: u32,
}

impl Default for ArchetypeParams {
    fn default() -> Self {
        Self {
            duplicate_probability: 0.0,
            tweets_per_day: 20.0,
            ffr_target: 1.0,
            retweet_propensity: 0.2,
            phrase_pool_size: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ArchetypeCohort {
    pub count: u32,
    pub params: ArchetypeParams,
}

/// Full generator configuration. The defaults parameterize every archetype
/// at least twice past its threshold and humans at most half-way toward
/// any, so the detector separates them cleanly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub window: TrackingWindow,
    pub humans: HumanParams,
    pub repeaters: ArchetypeCohort,
    pub flooders: ArchetypeCohort,
    pub follow_spammers: ArchetypeCohort,
    pub mixed: ArchetypeCohort,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            window: TrackingWindow::default(),
            humans: HumanParams::default(),
            repeaters: ArchetypeCohort {
                count: 3,
                params: ArchetypeParams {
                    duplicate_probability: 0.9,
                    tweets_per_day: 20.0,
                    ..ArchetypeParams::default()
                },
            },
            flooders: ArchetypeCohort {
                count: 3,
                params: ArchetypeParams {
                    tweets_per_day: 50.0,
                    ..ArchetypeParams::default()
                },
            },
            follow_spammers: ArchetypeCohort {
                count: 3,
                params: ArchetypeParams {
                    tweets_per_day: 15.0,
                    ffr_target: 7.0,
                    ..ArchetypeParams::default()
                },
            },
            mixed: ArchetypeCohort {
                count: 3,
                params: ArchetypeParams {
                    duplicate_probability: 0.8,
                    tweets_per_day: 50.0,
                    ffr_target: 7.0,
                    ..ArchetypeParams::default()
                },
            },
        }
    }
}

impl SynthConfig {
    pub fn total_accounts(&self) -> u64 {
        u64::from(self.humans.count)
            + u64::from(self.repeaters.count)
            + u64::from(self.flooders.count)
            + u64::from(self.follow_spammers.count)
            + u64::from(self.mixed.count)
    }

    fn validate(&self) -> Result<(), SynthError> {
        if self.total_accounts() == 0 {
            return Err(SynthError::NoAccounts);
        }
        let check_rate = |name: &str, rate: f64| {
            if rate <= 0.0 || !rate.is_finite() {
                return Err(SynthError::InvalidConfig(format!(
                    "{name}: tweets_per_day must be positive, got {rate}"
                )));
            }
            Ok(())
        };
        check_rate("humans", self.humans.tweets_per_day)?;
        for (name, cohort) in self.cohorts() {
            if cohort.count == 0 {
                continue;
            }
            check_rate(name, cohort.params.tweets_per_day)?;
            let p = cohort.params.duplicate_probability;
            if !(0.0..=1.0).contains(&p) {
                return Err(SynthError::InvalidConfig(format!(
                    "{name}: duplicate_probability must lie in [0, 1], got {p}"
                )));
            }
        }
        Ok(())
    }

    fn cohorts(&self) -> [(&'static str, &ArchetypeCohort); 4] {
        [
            ("repeaters", &self.repeaters),
            ("flooders", &self.flooders),
            ("follow_spammers", &self.follow_spammers),
            ("mixed", &self.mixed),
        ]
    }
}

struct AccountSpec {
    user_id: UserId,
    label: AccountLabel,
    tweets_per_day: f64,
    duplicate_probability: f64,
    ffr_target: Option<f64>,
    retweet_propensity: f64,
    phrase_pool_size: u32,
}

// Tweet ids are partitioned per account so parallel generation cannot
// collide.
const TWEETS_PER_ACCOUNT_BLOCK: u64 = 1_000_000;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Generate a labeled corpus. Deterministic for a fixed config: each
/// account runs on its own seeded substream and the result is assembled in
/// account order.
pub fn generate_corpus(config: &SynthConfig) -> Result<(Corpus, GroundTruth), SynthError> {
    config.validate()?;

    let mut specs: Vec<AccountSpec> = Vec::new();
    let mut next_id: UserId = 1;
    for _ in 0..config.humans.count {
        specs.push(AccountSpec {
            user_id: next_id,
            label: AccountLabel::Human,
            tweets_per_day: config.humans.tweets_per_day,
            duplicate_probability: 0.0,
            ffr_target: None,
            retweet_propensity: config.humans.retweet_propensity,
            phrase_pool_size: 0,
        });
        next_id += 1;
    }
    for (label, cohort) in [
        (AccountLabel::Repeater, &config.repeaters),
        (AccountLabel::Flooder, &config.flooders),
        (AccountLabel::FollowSpammer, &config.follow_spammers),
        (AccountLabel::Mixed, &config.mixed),
    ] {
        for _ in 0..cohort.count {
            specs.push(AccountSpec {
                user_id: next_id,
                label,
                tweets_per_day: cohort.params.tweets_per_day,
                duplicate_probability: cohort.params.duplicate_probability,
                ffr_target: Some(cohort.params.ffr_target),
                retweet_propensity: cohort.params.retweet_propensity,
                phrase_pool_size: cohort.params.phrase_pool_size,
            });
            next_id += 1;
        }
    }

    let total_accounts = specs.len() as u64;
    let window = config.window;
    let per_account: Vec<(Vec<TweetRecord>, Option<crate::ingest::UserProfile>)> = specs
        .par_iter()
        .map(|spec| generate_account(spec, config.seed, window, total_accounts))
        .collect();

    let mut records = Vec::new();
    let mut profiles = Vec::new();
    for (tweets, profile) in per_account {
        records.extend(tweets);
        profiles.extend(profile);
    }
    let corpus = Corpus::new(records, profiles, window);
    let labels = specs.iter().map(|s| (s.user_id, s.label)).collect();
    Ok((corpus, GroundTruth { labels }))
}

fn generate_account(
    spec: &AccountSpec,
    seed: u64,
    window: TrackingWindow,
    total_accounts: u64,
) -> (Vec<TweetRecord>, Option<crate::ingest::UserProfile>) {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ spec.user_id.wrapping_mul(0x51a7)));

    // Poisson arrivals: exponential inter-arrival gaps at the account rate.
    let horizon = (window.end() - window.start()).num_seconds() as f64;
    let gap = Exp::new(spec.tweets_per_day / 86_400.0).expect("validated rate");
    let mut offsets = Vec::new();
    let mut t = gap.sample(&mut rng);
    while t <= horizon {
        offsets.push(t as i64);
        t += gap.sample(&mut rng);
    }

    let pool: Vec<String> = (0..spec.phrase_pool_size)
        .map(|k| format!("broadcast {} blast {k}", spec.user_id))
        .collect();

    let mut tweets = Vec::with_capacity(offsets.len());
    for (seq, &offset) in offsets.iter().enumerate() {
        let created_at = window.start() + Duration::seconds(offset);
        let body = if !pool.is_empty() && rng.gen_bool(spec.duplicate_probability) {
            pool[rng.gen_range(0..pool.len())].clone()
        } else {
            format!("note {}-{seq} {}", spec.user_id, rng.gen::<u32>())
        };
        let retweeted_user_id = if total_accounts > 1 && rng.gen_bool(spec.retweet_propensity) {
            // Uniform target among the other accounts.
            let pick = rng.gen_range(0..total_accounts - 1) + 1;
            Some(if pick >= spec.user_id { pick + 1 } else { pick })
        } else {
            None
        };
        let text = match retweeted_user_id {
            Some(target) => format!("RT @user{target}: {body}"),
            None => body,
        };
        tweets.push(TweetRecord {
            tweet_id: spec.user_id * TWEETS_PER_ACCOUNT_BLOCK + seq as u64,
            user_id: spec.user_id,
            created_at,
            text,
            retweeted_user_id,
            retweeted_tweet_id: None,
        });
    }

    let profile = tweets.first().map(|first| {
        let (friends, followers) = match spec.ffr_target {
            // Bot archetypes get an exact target ratio over a fixed base.
            Some(target) => ((target * 1000.0).round() as u64, 1000),
            // Humans sit at exactly ratio 1.
            None => {
                let followers = rng.gen_range(100..2000);
                (followers, followers)
            }
        };
        profile_from_record(
            first,
            format!("user{}", spec.user_id),
            Some(friends),
            Some(followers),
        )
    });
    (tweets, profile)
}

/// Detector confusion matrix against ground truth.
///
/// Positives are the bot-like accounts among the highly active set; a
/// ground-truth positive is any non-human label. Labeled bots that never
/// reach the activity gate count as false negatives: the pipeline cannot
/// flag what it never evaluates, and the evaluation has to expose that.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub true_negatives: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ConfusionMatrix {
    fn from_counts(tp: u64, fp: u64, false_neg: u64, tn: u64) -> Self {
        // With no predicted (or no labeled) positives the ratio is
        // undefined; report a perfect score by convention.
        let precision = if tp + fp == 0 {
            1.0
        } else {
            tp as f64 / (tp + fp) as f64
        };
        let recall = if tp + false_neg == 0 {
            1.0
        } else {
            tp as f64 / (tp + false_neg) as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            true_positives: tp,
            false_positives: fp,
            false_negatives: false_neg,
            true_negatives: tn,
            precision,
            recall,
            f1,
        }
    }
}

/// Run the sampling procedure over a labeled corpus and score it.
///
/// `thresholds` must already carry the uniqueness threshold (derived or
/// overridden). Fails when the corpus contains an account the ground truth
/// does not label.
pub fn evaluate_detector(
    corpus: &Corpus,
    truth: &GroundTruth,
    thresholds: &DetectionThresholds,
    normalization: TextNormalization,
) -> Result<ConfusionMatrix, SynthError> {
    for profile in corpus.users() {
        if truth.label(profile.user_id).is_none() {
            return Err(SynthError::UnlabeledUser(profile.user_id));
        }
    }

    let active = select_highly_active(
        corpus,
        thresholds.activity_min_tweets,
        thresholds.activity_window_days,
    );
    let metrics = compute_user_metrics(corpus, &active, thresholds, normalization);
    let flagged: std::collections::BTreeSet<UserId> = metrics
        .iter()
        .filter(|m| m.bot_like)
        .map(|m| m.user_id)
        .collect();

    let (mut tp, mut fp, mut false_neg, mut tn) = (0, 0, 0, 0);
    for (user_id, label) in truth.iter() {
        match (label.is_bot(), flagged.contains(&user_id)) {
            (true, true) => tp += 1,
            (true, false) => false_neg += 1,
            (false, true) => fp += 1,
            (false, false) => tn += 1,
        }
    }
    Ok(ConfusionMatrix::from_counts(tp, fp, false_neg, tn))
}
