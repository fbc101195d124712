//! The bot sampling procedure: select highly active accounts, compute
//! tweet uniqueness (TU), tweet frequency (TFQ), and the friends-followers
//! ratio (FFR), and flag accounts that cross any threshold.
//!
//! Flag directions are strict: TU must fall *below* its threshold, TFQ and
//! FFR must *exceed* theirs. An account sitting exactly on a boundary is
//! not flagged.

use crate::ingest::{Corpus, TrackingWindow, TweetRecord, UserId, UserProfile};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::borrow::Cow;
use std::collections::{BTreeSet, HashSet};
use thiserror::Error;

pub const DEFAULT_ACTIVITY_MIN_TWEETS: u64 = 150;
pub const DEFAULT_ACTIVITY_WINDOW_DAYS: u32 = 14;
/// 25 tweets per day expressed in tweets per hour.
pub const DEFAULT_TFQ_THRESHOLD: f64 = 25.0 / 24.0;
pub const DEFAULT_FFR_THRESHOLD: f64 = 3.5;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("tweet uniqueness is undefined for an empty tweet list")]
    EmptyTweetList,
    #[error("cannot derive the uniqueness threshold: the active accounts have no tweets")]
    NoActiveTweets,
}

/// Text equality used by the uniqueness metric. The default compares raw
/// text character for character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextNormalization {
    #[default]
    None,
    CasefoldTrim,
}

impl TextNormalization {
    fn apply<'a>(&self, text: &'a str) -> Cow<'a, str> {
        match self {
            TextNormalization::None => Cow::Borrowed(text),
            TextNormalization::CasefoldTrim => Cow::Owned(text.trim().to_lowercase()),
        }
    }
}

/// The four tunable cut-offs of the sampling procedure.
///
/// `tu_threshold` is data-derived (the corpus-wide uniqueness of the active
/// sample) unless overridden; the other three default to fixed values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionThresholds {
    pub tu_threshold: f64,
    /// Tweets per hour an account must exceed.
    pub tfq_threshold: f64,
    /// Friends/followers ratio an account must exceed. Deliberately not
    /// data-derived: the corpus-wide ratio is far too low a bar and floods
    /// the sample.
    pub ffr_threshold: f64,
    pub activity_min_tweets: u64,
    pub activity_window_days: u32,
}

/// Optional per-field replacements applied over the defaults/derivation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ThresholdOverrides {
    pub tu_threshold: Option<f64>,
    pub tfq_threshold: Option<f64>,
    pub ffr_threshold: Option<f64>,
    pub activity_min_tweets: Option<u64>,
    pub activity_window_days: Option<u32>,
}

impl ThresholdOverrides {
    pub fn activity_min_tweets(&self) -> u64 {
        self.activity_min_tweets.unwrap_or(DEFAULT_ACTIVITY_MIN_TWEETS)
    }

    pub fn activity_window_days(&self) -> u32 {
        self.activity_window_days.unwrap_or(DEFAULT_ACTIVITY_WINDOW_DAYS)
    }
}

/// Computed metrics and per-metric flags for one account.
#[derive(Debug, Clone, PartialEq)]
pub struct UserMetrics {
    pub user_id: UserId,
    pub tweet_count: u64,
    pub distinct_text_count: u64,
    pub tu: f64,
    pub tfq: f64,
    /// `None` when the profile is incomplete; an undefined ratio never flags.
    pub ffr: Option<f64>,
    pub tu_flag: bool,
    pub tfq_flag: bool,
    pub ffr_flag: bool,
    pub bot_like: bool,
}

/// Raw metric values prior to thresholding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSample {
    pub user_id: UserId,
    pub tweet_count: u64,
    pub distinct_text_count: u64,
    pub tu: f64,
    pub tfq: f64,
    pub ffr: Option<f64>,
}

/// Accounts for which some `window_days`-day window (stepping one day at a
/// time from the tracking-window start) contains at least `min_tweets` of
/// their tweets. A `window_days` longer than the tracking period degrades
/// to the single full-period window.
pub fn select_highly_active(
    corpus: &Corpus,
    min_tweets: u64,
    window_days: u32,
) -> BTreeSet<UserId> {
    let window = corpus.window();
    let num_days = window.num_days();
    let span = window_days.min(num_days).max(1) as usize;

    corpus
        .tweets_by_user()
        .into_iter()
        .filter_map(|(user_id, tweets)| {
            let mut per_day = vec![0u64; num_days as usize];
            for tweet in tweets {
                if let Some(day) = window.day_index(tweet.created_at) {
                    per_day[day as usize] += 1;
                }
            }
            let mut count: u64 = per_day[..span].iter().sum();
            let mut best = count;
            for lead in span..num_days as usize {
                count += per_day[lead];
                count -= per_day[lead - span];
                best = best.max(count);
            }
            (best >= min_tweets).then_some(user_id)
        })
        .collect()
}

/// Distinct-text count and uniqueness ratio for one account's tweets.
/// Uniqueness is 1 exactly when every text differs from every other.
pub fn tweet_uniqueness(
    tweets: &[&TweetRecord],
    normalization: TextNormalization,
) -> Result<(u64, f64), MetricsError> {
    if tweets.is_empty() {
        return Err(MetricsError::EmptyTweetList);
    }
    let distinct: HashSet<Cow<'_, str>> = tweets
        .iter()
        .map(|t| normalization.apply(&t.text))
        .collect();
    let distinct = distinct.len() as u64;
    Ok((distinct, distinct as f64 / tweets.len() as f64))
}

/// Tweets per hour over the tracking period.
pub fn tweet_frequency(tweet_count: u64, window: &TrackingWindow) -> f64 {
    tweet_count as f64 / window.duration_hours()
}

/// Friends divided by followers.
///
/// Zero followers with a positive friend count yields +infinity (always
/// flags); zero over zero yields 0 (never flags); an incomplete profile
/// yields `None` (never flags), since treating missing counts as zero would
/// fabricate flags.
pub fn friends_followers_ratio(profile: &UserProfile) -> Option<f64> {
    let friends = profile.friends_count?;
    let followers = profile.followers_count?;
    Some(match (friends, followers) {
        (0, 0) => 0.0,
        (_, 0) => f64::INFINITY,
        _ => friends as f64 / followers as f64,
    })
}

/// Derive the detection thresholds for an active sample.
///
/// The uniqueness threshold is the corpus-wide uniqueness of the sample:
/// distinct text strings across *all* tweets by active accounts divided by
/// the total number of those tweets. Everything else comes from defaults
/// unless overridden.
pub fn derive_thresholds(
    corpus: &Corpus,
    active_users: &BTreeSet<UserId>,
    overrides: &ThresholdOverrides,
    normalization: TextNormalization,
) -> Result<DetectionThresholds, MetricsError> {
    let tu_threshold = match overrides.tu_threshold {
        Some(value) => value,
        None => {
            let mut total = 0u64;
            let mut distinct: HashSet<Cow<'_, str>> = HashSet::new();
            for tweet in corpus.tweets() {
                if active_users.contains(&tweet.user_id) {
                    total += 1;
                    distinct.insert(normalization.apply(&tweet.text));
                }
            }
            if total == 0 {
                return Err(MetricsError::NoActiveTweets);
            }
            distinct.len() as f64 / total as f64
        }
    };
    Ok(DetectionThresholds {
        tu_threshold,
        tfq_threshold: overrides.tfq_threshold.unwrap_or(DEFAULT_TFQ_THRESHOLD),
        ffr_threshold: overrides.ffr_threshold.unwrap_or(DEFAULT_FFR_THRESHOLD),
        activity_min_tweets: overrides.activity_min_tweets(),
        activity_window_days: overrides.activity_window_days(),
    })
}

/// Apply the three threshold tests. An account is bot-like when at least
/// one of them fires.
pub fn classify(sample: &MetricSample, thresholds: &DetectionThresholds) -> UserMetrics {
    let tu_flag = sample.tu < thresholds.tu_threshold;
    let tfq_flag = sample.tfq > thresholds.tfq_threshold;
    let ffr_flag = sample
        .ffr
        .is_some_and(|ffr| ffr > thresholds.ffr_threshold);
    UserMetrics {
        user_id: sample.user_id,
        tweet_count: sample.tweet_count,
        distinct_text_count: sample.distinct_text_count,
        tu: sample.tu,
        tfq: sample.tfq,
        ffr: sample.ffr,
        tu_flag,
        tfq_flag,
        ffr_flag,
        bot_like: tu_flag || tfq_flag || ffr_flag,
    }
}

/// Compute and classify metrics for every active account, sorted by user
/// id. Per-account work runs in parallel; the output is identical at any
/// thread count.
pub fn compute_user_metrics(
    corpus: &Corpus,
    active_users: &BTreeSet<UserId>,
    thresholds: &DetectionThresholds,
    normalization: TextNormalization,
) -> Vec<UserMetrics> {
    let by_user = corpus.tweets_by_user();
    let window = corpus.window();
    let active: Vec<UserId> = active_users.iter().copied().collect();
    active
        .par_iter()
        .filter_map(|&user_id| {
            let tweets = by_user.get(&user_id)?;
            let (distinct, tu) = tweet_uniqueness(tweets, normalization).ok()?;
            let sample = MetricSample {
                user_id,
                tweet_count: tweets.len() as u64,
                distinct_text_count: distinct,
                tu,
                tfq: tweet_frequency(tweets.len() as u64, &window),
                ffr: corpus.user(user_id).and_then(friends_followers_ratio),
            };
            Some(classify(&sample, thresholds))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{profile_from_record, TrackingWindow};
    use chrono::{DateTime, Duration, Utc};
    use proptest::prelude::*;

    fn ts(s: &str) -> DateTime<Utc> {
        DateTime::parse_from_rfc3339(s).unwrap().with_timezone(&Utc)
    }

    fn tweet(id: u64, user: UserId, at: DateTime<Utc>, text: &str) -> TweetRecord {
        TweetRecord {
            tweet_id: id,
            user_id: user,
            created_at: at,
            text: text.to_string(),
            retweeted_user_id: None,
            retweeted_tweet_id: None,
        }
    }

    /// Corpus over the default window with one user posting on a fixed
    /// per-day schedule: `schedule[d]` tweets on day `d`.
    fn scheduled_corpus(schedule: &[u64]) -> Corpus {
        let window = TrackingWindow::default();
        let mut records = Vec::new();
        let mut id = 0;
        for (day, &count) in schedule.iter().enumerate() {
            for k in 0..count {
                let at = window.start() + Duration::days(day as i64) + Duration::seconds(k as i64);
                records.push(tweet(id, 1, at, &format!("t{id}")));
                id += 1;
            }
        }
        let profiles = records
            .first()
            .map(|r| vec![profile_from_record(r, "u1".into(), None, None)])
            .into_iter()
            .flatten()
            .collect();
        Corpus::new(records, profiles, window)
    }

    fn default_thresholds(tu: f64) -> DetectionThresholds {
        DetectionThresholds {
            tu_threshold: tu,
            tfq_threshold: DEFAULT_TFQ_THRESHOLD,
            ffr_threshold: DEFAULT_FFR_THRESHOLD,
            activity_min_tweets: DEFAULT_ACTIVITY_MIN_TWEETS,
            activity_window_days: DEFAULT_ACTIVITY_WINDOW_DAYS,
        }
    }

    fn sample(tu: f64, tfq: f64, ffr: Option<f64>) -> MetricSample {
        MetricSample {
            user_id: 1,
            tweet_count: 10,
            distinct_text_count: 10,
            tu,
            tfq,
            ffr,
        }
    }

    fn profile(friends: Option<u64>, followers: Option<u64>) -> UserProfile {
        let record = tweet(1, 1, ts("2020-03-01T00:00:00Z"), "x");
        profile_from_record(&record, "u1".into(), friends, followers)
    }

    // Brute-force oracle: slide every possible day-aligned window and count.
    fn brute_force_active(corpus: &Corpus, min_tweets: u64, window_days: u32) -> BTreeSet<UserId> {
        let window = corpus.window();
        let num_days = window.num_days();
        let span = window_days.min(num_days).max(1);
        let mut selected = BTreeSet::new();
        for (user, tweets) in corpus.tweets_by_user() {
            for start in 0..=(num_days - span) {
                let count = tweets
                    .iter()
                    .filter(|t| {
                        window
                            .day_index(t.created_at)
                            .is_some_and(|d| d >= start && d < start + span)
                    })
                    .count() as u64;
                if count >= min_tweets {
                    selected.insert(user);
                    break;
                }
            }
        }
        selected
    }

    #[test]
    fn burst_of_150_in_one_day_is_highly_active() {
        let mut schedule = vec![0u64; 84];
        schedule[40] = 150;
        let corpus = scheduled_corpus(&schedule);
        assert!(select_highly_active(&corpus, 150, 14).contains(&1));
    }

    #[test]
    fn account_below_minimum_everywhere_is_not_selected() {
        let mut schedule = vec![0u64; 84];
        schedule[40] = 149;
        let corpus = scheduled_corpus(&schedule);
        assert!(select_highly_active(&corpus, 150, 14).is_empty());
    }

    #[test]
    fn uniform_rate_selection_matches_brute_force_window_scan() {
        // 10/day gives 140 per fortnight, 11/day gives 154.
        for (rate, expect) in [(10u64, false), (11, true)] {
            let corpus = scheduled_corpus(&[rate; 84]);
            let selected = select_highly_active(&corpus, 150, 14);
            assert_eq!(selected.contains(&1), expect, "rate {rate}");
            assert_eq!(selected, brute_force_active(&corpus, 150, 14));
        }
    }

    #[test]
    fn window_days_longer_than_period_uses_full_period() {
        let corpus = scheduled_corpus(&[2; 84]);
        // 168 tweets total; no 14-day window reaches 150 but the full period does.
        assert!(select_highly_active(&corpus, 150, 14).is_empty());
        assert!(select_highly_active(&corpus, 150, 500).contains(&1));
    }

    #[test]
    fn uniqueness_of_identical_texts_is_one_over_k() {
        let base = ts("2020-03-01T00:00:00Z");
        let records: Vec<TweetRecord> =
            (0..10).map(|i| tweet(i, 1, base, "same thing")).collect();
        let refs: Vec<&TweetRecord> = records.iter().collect();
        let (distinct, tu) = tweet_uniqueness(&refs, TextNormalization::None).unwrap();
        assert_eq!(distinct, 1);
        assert!((tu - 0.1).abs() < 1e-12);
    }

    #[test]
    fn uniqueness_of_all_distinct_texts_is_one() {
        let base = ts("2020-03-01T00:00:00Z");
        let records: Vec<TweetRecord> =
            (0..10).map(|i| tweet(i, 1, base, &format!("text {i}"))).collect();
        let refs: Vec<&TweetRecord> = records.iter().collect();
        let (distinct, tu) = tweet_uniqueness(&refs, TextNormalization::None).unwrap();
        assert_eq!(distinct, 10);
        assert_eq!(tu, 1.0);
    }

    #[test]
    fn uniqueness_counts_distinct_strings() {
        let base = ts("2020-03-01T00:00:00Z");
        let texts = ["a", "a", "b", "c", "c", "c"];
        let records: Vec<TweetRecord> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| tweet(i as u64, 1, base, t))
            .collect();
        let refs: Vec<&TweetRecord> = records.iter().collect();
        // Hash-set oracle over the raw texts.
        let expected = texts.iter().collect::<HashSet<_>>().len() as u64;
        let (distinct, tu) = tweet_uniqueness(&refs, TextNormalization::None).unwrap();
        assert_eq!(distinct, expected);
        assert_eq!(distinct, 3);
        assert!((tu - 0.5).abs() < 1e-12);
    }

    #[test]
    fn uniqueness_of_empty_list_is_an_error() {
        assert!(matches!(
            tweet_uniqueness(&[], TextNormalization::None),
            Err(MetricsError::EmptyTweetList)
        ));
    }

    #[test]
    fn casefold_trim_normalization_collapses_variants() {
        let base = ts("2020-03-01T00:00:00Z");
        let records = [
            tweet(0, 1, base, "Hello World"),
            tweet(1, 1, base, "  hello world "),
        ];
        let refs: Vec<&TweetRecord> = records.iter().collect();
        let (raw, _) = tweet_uniqueness(&refs, TextNormalization::None).unwrap();
        let (folded, _) = tweet_uniqueness(&refs, TextNormalization::CasefoldTrim).unwrap();
        assert_eq!(raw, 2);
        assert_eq!(folded, 1);
    }

    #[test]
    fn derived_threshold_on_reported_counts() {
        // 117,678 tweets of which exactly 82,692 carry distinct texts.
        let window = TrackingWindow::default();
        let total = 117_678u64;
        let distinct = 82_692u64;
        let records: Vec<TweetRecord> = (0..total)
            .map(|i| {
                let text_idx = if i < distinct { i } else { i - distinct };
                tweet(
                    i,
                    1 + i % 5,
                    window.start() + Duration::seconds(i as i64),
                    &format!("text {text_idx}"),
                )
            })
            .collect();
        let corpus = Corpus::new(records, Vec::new(), window);
        let active: BTreeSet<UserId> = (1..=5).collect();
        let thresholds = derive_thresholds(
            &corpus,
            &active,
            &ThresholdOverrides::default(),
            TextNormalization::None,
        )
        .unwrap();
        assert!((thresholds.tu_threshold - 0.7027).abs() <= 0.0005);
    }

    #[test]
    fn derived_threshold_when_all_texts_identical_is_one_over_n() {
        let window = TrackingWindow::default();
        let records: Vec<TweetRecord> = (0..40)
            .map(|i| tweet(i, 1, window.start() + Duration::seconds(i as i64), "echo"))
            .collect();
        let corpus = Corpus::new(records, Vec::new(), window);
        let active: BTreeSet<UserId> = [1].into_iter().collect();
        let thresholds = derive_thresholds(
            &corpus,
            &active,
            &ThresholdOverrides::default(),
            TextNormalization::None,
        )
        .unwrap();
        assert!((thresholds.tu_threshold - 1.0 / 40.0).abs() < 1e-12);
    }

    #[test]
    fn derived_threshold_on_small_synthetic_sample() {
        let window = TrackingWindow::default();
        let records: Vec<TweetRecord> = (0..1000)
            .map(|i| {
                let text_idx = if i < 700 { i } else { i - 700 };
                tweet(
                    i,
                    1,
                    window.start() + Duration::seconds(i as i64),
                    &format!("s{text_idx}"),
                )
            })
            .collect();
        let corpus = Corpus::new(records, Vec::new(), window);
        let active: BTreeSet<UserId> = [1].into_iter().collect();
        let thresholds = derive_thresholds(
            &corpus,
            &active,
            &ThresholdOverrides::default(),
            TextNormalization::None,
        )
        .unwrap();
        assert!((thresholds.tu_threshold - 0.700).abs() < 1e-12);
    }

    #[test]
    fn derivation_without_active_tweets_is_an_error() {
        let corpus = Corpus::empty(TrackingWindow::default());
        let active: BTreeSet<UserId> = [1].into_iter().collect();
        assert!(matches!(
            derive_thresholds(
                &corpus,
                &active,
                &ThresholdOverrides::default(),
                TextNormalization::None
            ),
            Err(MetricsError::NoActiveTweets)
        ));
    }

    #[test]
    fn override_replaces_derivation() {
        let corpus = Corpus::empty(TrackingWindow::default());
        let active = BTreeSet::new();
        let overrides = ThresholdOverrides {
            tu_threshold: Some(0.703),
            tfq_threshold: Some(2.0),
            ..Default::default()
        };
        let thresholds =
            derive_thresholds(&corpus, &active, &overrides, TextNormalization::None).unwrap();
        assert_eq!(thresholds.tu_threshold, 0.703);
        assert_eq!(thresholds.tfq_threshold, 2.0);
        assert_eq!(thresholds.ffr_threshold, DEFAULT_FFR_THRESHOLD);
    }

    #[test]
    fn frequency_of_three_per_hour_is_three() {
        let window = TrackingWindow::default();
        let count = (window.duration_hours() * 3.0).round() as u64;
        let tfq = tweet_frequency(count, &window);
        assert!((tfq - 3.0).abs() < 1e-3);
        assert_eq!(tweet_frequency(0, &window), 0.0);
    }

    #[test]
    fn heavy_account_frequency_exceeds_threshold() {
        let window = TrackingWindow::new(
            ts("2020-02-27T00:00:00Z"),
            ts("2020-02-27T00:00:00Z") + Duration::hours(2016),
        )
        .unwrap();
        let tfq = tweet_frequency(3967, &window);
        assert!((tfq - 1.9678).abs() < 0.0005);
        assert!(tfq > DEFAULT_TFQ_THRESHOLD);
    }

    #[test]
    fn ratio_boundary_requires_strict_exceed() {
        let exactly = friends_followers_ratio(&profile(Some(3500), Some(1000))).unwrap();
        let above = friends_followers_ratio(&profile(Some(3501), Some(1000))).unwrap();
        assert_eq!(exactly, 3.5);
        assert!(exactly <= DEFAULT_FFR_THRESHOLD);
        assert!(above > DEFAULT_FFR_THRESHOLD);
    }

    #[test]
    fn ratio_edge_cases() {
        assert_eq!(friends_followers_ratio(&profile(Some(0), Some(0))), Some(0.0));
        assert_eq!(
            friends_followers_ratio(&profile(Some(7), Some(2))),
            Some(3.5)
        );
        assert_eq!(
            friends_followers_ratio(&profile(Some(5), Some(0))),
            Some(f64::INFINITY)
        );
        assert_eq!(friends_followers_ratio(&profile(None, Some(10))), None);
        assert_eq!(friends_followers_ratio(&profile(Some(10), None)), None);
    }

    #[test]
    fn infinite_ratio_always_flags() {
        let metrics = classify(&sample(1.0, 0.0, Some(f64::INFINITY)), &default_thresholds(0.7));
        assert!(metrics.ffr_flag);
        assert!(metrics.bot_like);
    }

    #[test]
    fn boundary_uniqueness_does_not_flag() {
        let metrics = classify(&sample(0.703, 0.0, Some(1.0)), &default_thresholds(0.703));
        assert!(!metrics.tu_flag);
        assert!(!metrics.bot_like);
    }

    #[test]
    fn frequency_above_threshold_flags() {
        let metrics = classify(&sample(1.0, 1.05, None), &default_thresholds(0.703));
        assert!(metrics.tfq_flag);
        assert!(metrics.bot_like);
    }

    #[test]
    fn ratio_alone_can_make_account_bot_like() {
        let metrics = classify(&sample(0.9, 0.1, Some(4.0)), &default_thresholds(0.703));
        assert!(!metrics.tu_flag);
        assert!(!metrics.tfq_flag);
        assert!(metrics.ffr_flag);
        assert!(metrics.bot_like);
    }

    #[test]
    fn verdict_matches_truth_table_over_flag_combinations() {
        let thresholds = default_thresholds(0.7);
        // One value on each side of every threshold.
        for tu in [0.5, 0.9] {
            for tfq in [0.5, 2.0] {
                for ffr in [1.0, 5.0] {
                    let metrics = classify(&sample(tu, tfq, Some(ffr)), &thresholds);
                    let expect_tu = tu < thresholds.tu_threshold;
                    let expect_tfq = tfq > thresholds.tfq_threshold;
                    let expect_ffr = ffr > thresholds.ffr_threshold;
                    assert_eq!(metrics.tu_flag, expect_tu);
                    assert_eq!(metrics.tfq_flag, expect_tfq);
                    assert_eq!(metrics.ffr_flag, expect_ffr);
                    assert_eq!(metrics.bot_like, expect_tu || expect_tfq || expect_ffr);
                }
            }
        }
    }

    #[test]
    fn undefined_ratio_never_flags() {
        let metrics = classify(&sample(1.0, 0.0, None), &default_thresholds(0.7));
        assert!(!metrics.ffr_flag);
        assert!(!metrics.bot_like);
    }

    proptest! {
        #[test]
        fn uniqueness_stays_in_unit_interval(texts in proptest::collection::vec("[a-c]{0,3}", 1..50)) {
            let base = ts("2020-03-01T00:00:00Z");
            let records: Vec<TweetRecord> = texts
                .iter()
                .enumerate()
                .map(|(i, t)| tweet(i as u64, 1, base, &format!("x{t}")))
                .collect();
            let refs: Vec<&TweetRecord> = records.iter().collect();
            let (distinct, tu) = tweet_uniqueness(&refs, TextNormalization::None).unwrap();
            prop_assert!(tu > 0.0 && tu <= 1.0);
            prop_assert_eq!(tu == 1.0, distinct as usize == records.len());
        }

        #[test]
        fn uniqueness_is_permutation_invariant(
            texts in proptest::collection::vec("[a-c]{0,3}", 1..40),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let base = ts("2020-03-01T00:00:00Z");
            let records: Vec<TweetRecord> = texts
                .iter()
                .enumerate()
                .map(|(i, t)| tweet(i as u64, 1, base, t.as_str().trim_end()))
                .filter(|t| !t.text.is_empty())
                .collect();
            prop_assume!(!records.is_empty());
            let mut shuffled: Vec<&TweetRecord> = records.iter().collect();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let refs: Vec<&TweetRecord> = records.iter().collect();
            let original = tweet_uniqueness(&refs, TextNormalization::None).unwrap();
            let permuted = tweet_uniqueness(&shuffled, TextNormalization::None).unwrap();
            prop_assert_eq!(original, permuted);
        }

        #[test]
        fn frequency_scales_linearly(count in 0u64..100_000) {
            let window = TrackingWindow::default();
            let single = tweet_frequency(count, &window);
            let double = tweet_frequency(count * 2, &window);
            prop_assert!((double - 2.0 * single).abs() < 1e-9);
        }

        #[test]
        fn classification_is_monotone(
            tu in 0.0f64..1.0, tfq in 0.0f64..5.0, ffr in 0.0f64..10.0,
            dtu in 0.0f64..0.5, dtfq in 0.0f64..5.0, dffr in 0.0f64..10.0,
        ) {
            let thresholds = default_thresholds(0.7);
            let before = classify(&sample(tu, tfq, Some(ffr)), &thresholds);
            // Lower uniqueness, raise frequency, raise ratio: never un-flags.
            let after = classify(
                &sample((tu - dtu).max(0.0), tfq + dtfq, Some(ffr + dffr)),
                &thresholds,
            );
            prop_assert!(!before.bot_like || after.bot_like);
        }
    }
}
