//! Corpus ingestion: parsing newline-delimited tweet archives, merging
//! multiple crawls with duplicate removal, and restricting records to a
//! tracking window.
//!
//! The on-disk format is one JSON object per line with the fields
//! `id`, `user_id`, `user_screen_name`, `created_at` (ISO-8601 UTC),
//! `text`, and the optional `retweeted_user_id`, `retweeted_tweet_id`,
//! `friends_count`, `followers_count`. Files ending in `.gz` are
//! transparently gunzipped.

use chrono::{DateTime, SecondsFormat, TimeZone, Utc};
use flate2::read::GzDecoder;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Numeric account identifier.
pub type UserId = u64;
/// Numeric tweet identifier, unique within a corpus.
pub type TweetId = u64;

const SECONDS_PER_DAY: i64 = 86_400;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    /// More than half of the lines failed to parse, which almost always
    /// means the file is not in the expected archive schema.
    #[error("{path}: {malformed} of {total} lines malformed; not a recognizable tweet archive")]
    Format {
        path: PathBuf,
        malformed: u64,
        total: u64,
    },
    #[error("invalid tracking window: end {end} is not after start {start}")]
    InvalidWindow {
        start: DateTime<Utc>,
        end: DateTime<Utc>,
    },
}

/// Whether a record is an original post or a retweet of another account.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TweetKind {
    Original,
    Retweet,
}

/// One tweet or retweet from the archive.
///
/// A record is a retweet exactly when `retweeted_user_id` is present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TweetRecord {
    pub tweet_id: TweetId,
    pub user_id: UserId,
    pub created_at: DateTime<Utc>,
    pub text: String,
    pub retweeted_user_id: Option<UserId>,
    pub retweeted_tweet_id: Option<TweetId>,
}

impl TweetRecord {
    pub fn kind(&self) -> TweetKind {
        if self.retweeted_user_id.is_some() {
            TweetKind::Retweet
        } else {
            TweetKind::Original
        }
    }

    pub fn is_retweet(&self) -> bool {
        self.retweeted_user_id.is_some()
    }
}

/// Per-account identity plus friend/follower counts.
///
/// Counts are optional: archives that omit them yield an incomplete
/// profile, for which the friends-followers ratio is undefined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserProfile {
    pub user_id: UserId,
    pub screen_name: String,
    pub friends_count: Option<u64>,
    pub followers_count: Option<u64>,
    // Provenance keys used to resolve conflicts when crawls are merged:
    // the observation with the latest (created_at, tweet_id) wins.
    pub(crate) name_seen: (DateTime<Utc>, TweetId),
    pub(crate) counts_seen: Option<(DateTime<Utc>, TweetId)>,
}

impl UserProfile {
    /// Both counts known, so the friends-followers ratio is defined.
    pub fn is_complete(&self) -> bool {
        self.friends_count.is_some() && self.followers_count.is_some()
    }

    fn absorb(&mut self, other: UserProfile) {
        if other.name_seen > self.name_seen {
            self.screen_name = other.screen_name;
            self.name_seen = other.name_seen;
        }
        if other.counts_seen > self.counts_seen {
            self.friends_count = other.friends_count;
            self.followers_count = other.followers_count;
            self.counts_seen = other.counts_seen;
        }
    }
}

/// Closed interval of UTC time the analysis is restricted to. The window
/// length is the denominator of the tweet-frequency metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrackingWindow {
    start: DateTime<Utc>,
    end: DateTime<Utc>,
}

impl TrackingWindow {
    pub fn new(start: DateTime<Utc>, end: DateTime<Utc>) -> Result<Self, IngestError> {
        if end <= start {
            return Err(IngestError::InvalidWindow { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn end(&self) -> DateTime<Utc> {
        self.end
    }

    pub fn duration_hours(&self) -> f64 {
        (self.end - self.start).num_seconds() as f64 / 3600.0
    }

    pub fn contains(&self, ts: DateTime<Utc>) -> bool {
        self.start <= ts && ts <= self.end
    }

    /// Number of whole-day buckets covering the window (last bucket may be
    /// partial). At least 1.
    pub fn num_days(&self) -> u32 {
        let secs = (self.end - self.start).num_seconds();
        (secs.div_euclid(SECONDS_PER_DAY) + i64::from(secs.rem_euclid(SECONDS_PER_DAY) != 0))
            .max(1) as u32
    }

    /// Day bucket of an in-window timestamp, counted from the window start.
    /// A timestamp exactly on the inclusive end lands in the last bucket.
    pub fn day_index(&self, ts: DateTime<Utc>) -> Option<u32> {
        if !self.contains(ts) {
            return None;
        }
        let idx = (ts - self.start).num_seconds() / SECONDS_PER_DAY;
        Some((idx as u32).min(self.num_days() - 1))
    }
}

impl Default for TrackingWindow {
    /// The built-in 12-week default window, 2020-02-27 00:00 UTC through
    /// 2020-05-20 23:59 UTC. Used when neither configuration nor data
    /// extent provides one.
    fn default() -> Self {
        Self {
            start: Utc.with_ymd_and_hms(2020, 2, 27, 0, 0, 0).unwrap(),
            end: Utc.with_ymd_and_hms(2020, 5, 20, 23, 59, 0).unwrap(),
        }
    }
}

// Window (de)serialization for config files: `{ start = "...", end = "..." }`.
#[derive(Serialize, Deserialize)]
struct WindowRepr {
    start: DateTime<Utc>,
    end: DateTime<Utc>,
}

impl Serialize for TrackingWindow {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        WindowRepr {
            start: self.start,
            end: self.end,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TrackingWindow {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = WindowRepr::deserialize(deserializer)?;
        TrackingWindow::new(repr.start, repr.end).map_err(serde::de::Error::custom)
    }
}

/// An immutable set of tweets and author profiles restricted to a tracking
/// window. Tweets are held sorted by `tweet_id` with exactly one record per
/// id, so iteration order is deterministic regardless of how the corpus was
/// assembled.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    tweets: Vec<TweetRecord>,
    users: BTreeMap<UserId, UserProfile>,
    window: TrackingWindow,
}

impl Corpus {
    /// Assemble a corpus from raw records and profiles. Records sharing a
    /// `tweet_id` are collapsed to the first occurrence.
    pub fn new(
        records: Vec<TweetRecord>,
        profiles: Vec<UserProfile>,
        window: TrackingWindow,
    ) -> Self {
        let mut by_id: BTreeMap<TweetId, TweetRecord> = BTreeMap::new();
        for record in records {
            by_id.entry(record.tweet_id).or_insert(record);
        }
        let mut users: BTreeMap<UserId, UserProfile> = BTreeMap::new();
        for profile in profiles {
            match users.entry(profile.user_id) {
                std::collections::btree_map::Entry::Vacant(slot) => {
                    slot.insert(profile);
                }
                std::collections::btree_map::Entry::Occupied(mut slot) => {
                    slot.get_mut().absorb(profile);
                }
            }
        }
        Self {
            tweets: by_id.into_values().collect(),
            users,
            window,
        }
    }

    pub fn empty(window: TrackingWindow) -> Self {
        Self {
            tweets: Vec::new(),
            users: BTreeMap::new(),
            window,
        }
    }

    pub fn tweets(&self) -> &[TweetRecord] {
        &self.tweets
    }

    pub fn tweet_count(&self) -> u64 {
        self.tweets.len() as u64
    }

    pub fn user(&self, user_id: UserId) -> Option<&UserProfile> {
        self.users.get(&user_id)
    }

    pub fn users(&self) -> impl Iterator<Item = &UserProfile> {
        self.users.values()
    }

    pub fn user_count(&self) -> u64 {
        self.users.len() as u64
    }

    pub fn window(&self) -> TrackingWindow {
        self.window
    }

    /// Tweets grouped per author, in tweet-id order within each group.
    pub fn tweets_by_user(&self) -> BTreeMap<UserId, Vec<&TweetRecord>> {
        let mut grouped: BTreeMap<UserId, Vec<&TweetRecord>> = BTreeMap::new();
        for tweet in &self.tweets {
            grouped.entry(tweet.user_id).or_default().push(tweet);
        }
        grouped
    }

    /// Promote originals whose text starts with `RT @name:` to retweets by
    /// resolving `name` against the profiles in this corpus. Records whose
    /// name cannot be resolved are left untouched. Returns the number of
    /// records promoted.
    pub fn infer_retweets_from_prefix(&mut self) -> u64 {
        // When two accounts claim the same screen name over the crawl, the
        // later observation wins, mirroring profile conflict resolution.
        let mut names: HashMap<&str, (&UserProfile, UserId)> = HashMap::new();
        for profile in self.users.values() {
            names
                .entry(profile.screen_name.as_str())
                .and_modify(|(held, id)| {
                    if (profile.name_seen, profile.user_id) > (held.name_seen, *id) {
                        *held = profile;
                        *id = profile.user_id;
                    }
                })
                .or_insert((profile, profile.user_id));
        }
        let resolved: Vec<(usize, UserId)> = self
            .tweets
            .iter()
            .enumerate()
            .filter(|(_, t)| t.retweeted_user_id.is_none())
            .filter_map(|(i, t)| {
                let name = parse_rt_prefix(&t.text)?;
                names.get(name).map(|(_, id)| (i, *id))
            })
            .collect();
        for &(i, target) in &resolved {
            self.tweets[i].retweeted_user_id = Some(target);
        }
        resolved.len() as u64
    }

    /// Re-emit the corpus in the archive line format, one record per line in
    /// tweet-id order. Author counts come from the resolved profiles, so a
    /// round trip through this writer preserves profile resolution.
    pub fn write_ndjson<W: Write>(&self, mut out: W) -> io::Result<()> {
        for tweet in &self.tweets {
            let profile = self.users.get(&tweet.user_id);
            let line = TweetLine {
                id: tweet.tweet_id,
                user_id: tweet.user_id,
                user_screen_name: profile
                    .map(|p| p.screen_name.clone())
                    .unwrap_or_else(|| format!("user{}", tweet.user_id)),
                created_at: tweet
                    .created_at
                    .to_rfc3339_opts(SecondsFormat::Secs, true),
                text: tweet.text.clone(),
                retweeted_user_id: tweet.retweeted_user_id,
                retweeted_tweet_id: tweet.retweeted_tweet_id,
                friends_count: profile.and_then(|p| p.friends_count),
                followers_count: profile.and_then(|p| p.followers_count),
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn write_ndjson_file(&self, path: &Path) -> Result<(), IngestError> {
        let io_err = |source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        };
        let file = File::create(path).map_err(io_err)?;
        let mut out = io::BufWriter::new(file);
        self.write_ndjson(&mut out).map_err(io_err)?;
        out.flush().map_err(io_err)
    }
}

/// Leading `RT @name:` marker, returning the referenced screen name.
fn parse_rt_prefix(text: &str) -> Option<&str> {
    let rest = text.strip_prefix("RT @")?;
    let colon = rest.find(':')?;
    let name = &rest[..colon];
    if name.is_empty() || !name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_') {
        return None;
    }
    Some(name)
}

/// Supported archive formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorpusFormat {
    #[default]
    Ndjson,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IngestOptions {
    /// Also treat an original whose text starts with `RT @name:` as a
    /// retweet when the explicit field is absent.
    pub infer_rt_prefix: bool,
}

/// A parsed file plus its parse diagnostics. Malformed lines are counted
/// rather than silently dropped.
#[derive(Debug)]
pub struct ParsedCorpus {
    pub corpus: Corpus,
    pub total_lines: u64,
    pub malformed_lines: u64,
    pub duplicate_tweet_ids: u64,
}

#[derive(Serialize, Deserialize)]
struct TweetLine {
    id: TweetId,
    user_id: UserId,
    user_screen_name: String,
    created_at: String,
    text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    retweeted_user_id: Option<UserId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    retweeted_tweet_id: Option<TweetId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    friends_count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    followers_count: Option<u64>,
}

/// Parse one archive file into a corpus.
///
/// The corpus window is the data extent (min to max `created_at`); an empty
/// or single-instant file falls back to the default window or widens the
/// extent to one hour. Fails when the file is unreadable or when more than
/// half of its lines are malformed.
pub fn parse_corpus_file(
    path: &Path,
    format: CorpusFormat,
    options: IngestOptions,
) -> Result<ParsedCorpus, IngestError> {
    let CorpusFormat::Ndjson = format;
    let io_err = |source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(io_err)?;
    let reader: Box<dyn Read> = if path.extension().is_some_and(|ext| ext == "gz") {
        Box::new(GzDecoder::new(file))
    } else {
        Box::new(file)
    };

    let mut records = Vec::new();
    let mut profiles = Vec::new();
    let mut total_lines = 0u64;
    let mut malformed = 0u64;
    for line in BufReader::new(reader).lines() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        total_lines += 1;
        match parse_line(&line) {
            Some((record, profile)) => {
                records.push(record);
                profiles.push(profile);
            }
            None => malformed += 1,
        }
    }
    if malformed * 2 > total_lines {
        return Err(IngestError::Format {
            path: path.to_path_buf(),
            malformed,
            total: total_lines,
        });
    }

    let parsed = records.len() as u64;
    let window = extent_window(&records);
    let mut corpus = Corpus::new(records, profiles, window);
    if options.infer_rt_prefix {
        corpus.infer_retweets_from_prefix();
    }
    let duplicate_tweet_ids = parsed - corpus.tweet_count();
    Ok(ParsedCorpus {
        corpus,
        total_lines,
        malformed_lines: malformed,
        duplicate_tweet_ids,
    })
}

/// Parse several files concurrently and merge them in input order.
pub fn parse_corpus_files(
    paths: &[PathBuf],
    format: CorpusFormat,
    options: IngestOptions,
) -> Result<(Corpus, Vec<ParsedCorpus>), IngestError> {
    let parsed: Result<Vec<ParsedCorpus>, IngestError> = paths
        .par_iter()
        .map(|path| parse_corpus_file(path, format, options))
        .collect();
    let mut parsed = parsed?;
    let corpora = parsed.iter().map(|p| p.corpus.clone()).collect();
    let merged = merge_corpora(corpora);
    for report in &mut parsed {
        report.corpus = Corpus::empty(report.corpus.window());
    }
    Ok((merged, parsed))
}

fn parse_line(line: &str) -> Option<(TweetRecord, UserProfile)> {
    let raw: TweetLine = serde_json::from_str(line).ok()?;
    if raw.text.trim().is_empty() {
        return None;
    }
    // Sub-second precision is truncated; the corpus works at whole seconds.
    let created_at = DateTime::parse_from_rfc3339(&raw.created_at)
        .ok()?
        .with_timezone(&Utc)
        .with_nanosecond0();
    let record = TweetRecord {
        tweet_id: raw.id,
        user_id: raw.user_id,
        created_at,
        text: raw.text,
        retweeted_user_id: raw.retweeted_user_id,
        retweeted_tweet_id: raw.retweeted_tweet_id,
    };
    let has_counts = raw.friends_count.is_some() || raw.followers_count.is_some();
    let profile = UserProfile {
        user_id: raw.user_id,
        screen_name: raw.user_screen_name,
        friends_count: raw.friends_count,
        followers_count: raw.followers_count,
        name_seen: (created_at, raw.id),
        counts_seen: has_counts.then_some((created_at, raw.id)),
    };
    Some((record, profile))
}

trait TruncateSubsec {
    fn with_nanosecond0(self) -> Self;
}

impl TruncateSubsec for DateTime<Utc> {
    fn with_nanosecond0(self) -> Self {
        Utc.timestamp_opt(self.timestamp(), 0).unwrap()
    }
}

fn extent_window(records: &[TweetRecord]) -> TrackingWindow {
    let mut stamps = records.iter().map(|r| r.created_at);
    let Some(first) = stamps.next() else {
        return TrackingWindow::default();
    };
    let (min, max) = stamps.fold((first, first), |(lo, hi), ts| (lo.min(ts), hi.max(ts)));
    if min == max {
        // Degenerate single-instant extent; widen so the window has a
        // positive duration.
        TrackingWindow::new(min, max + chrono::Duration::hours(1)).unwrap()
    } else {
        TrackingWindow::new(min, max).unwrap()
    }
}

/// Union several corpora, keeping exactly one record per tweet id (first
/// occurrence in input order wins) and resolving profile conflicts toward
/// the latest observation. The result window spans all input windows.
pub fn merge_corpora(corpora: Vec<Corpus>) -> Corpus {
    let mut windows = corpora.iter().map(|c| c.window);
    let window = match windows.next() {
        None => TrackingWindow::default(),
        Some(first) => {
            let (start, end) = windows.fold((first.start, first.end), |(s, e), w| {
                (s.min(w.start), e.max(w.end))
            });
            TrackingWindow { start, end }
        }
    };

    let mut tweets: BTreeMap<TweetId, TweetRecord> = BTreeMap::new();
    let mut users: BTreeMap<UserId, UserProfile> = BTreeMap::new();
    for corpus in corpora {
        for tweet in corpus.tweets {
            tweets.entry(tweet.tweet_id).or_insert(tweet);
        }
        for (user_id, profile) in corpus.users {
            match users.entry(user_id) {
                std::collections::btree_map::Entry::Vacant(slot) => {
                    slot.insert(profile);
                }
                std::collections::btree_map::Entry::Occupied(mut slot) => {
                    slot.get_mut().absorb(profile);
                }
            }
        }
    }
    Corpus {
        tweets: tweets.into_values().collect(),
        users,
        window,
    }
}

/// Keep only tweets with `start <= created_at <= end` and adopt the given
/// window. Profiles are retained even when all their tweets fall outside.
pub fn filter_window(corpus: Corpus, window: TrackingWindow) -> Corpus {
    let tweets = corpus
        .tweets
        .into_iter()
        .filter(|t| window.contains(t.created_at))
        .collect();
    Corpus {
        tweets,
        users: corpus.users,
        window,
    }
}

/// Convenience constructor for synthetic and test records.
pub fn profile_from_record(
    record: &TweetRecord,
    screen_name: String,
    friends_count: Option<u64>,
    followers_count: Option<u64>,
) -> UserProfile {
    let has_counts = friends_count.is_some() || followers_count.is_some();
    UserProfile {
        user_id: record.user_id,
        screen_name,
        friends_count,
        followers_count,
        name_seen: (record.created_at, record.tweet_id),
        counts_seen: has_counts.then_some((record.created_at, record.tweet_id)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn ts(s: &str) -> DateTime<Utc> {
        DateTime::parse_from_rfc3339(s).unwrap().with_timezone(&Utc)
    }

    fn tweet(id: TweetId, user: UserId, at: &str, text: &str) -> TweetRecord {
        TweetRecord {
            tweet_id: id,
            user_id: user,
            created_at: ts(at),
            text: text.to_string(),
            retweeted_user_id: None,
            retweeted_tweet_id: None,
        }
    }

    fn stub_profile(user: UserId) -> UserProfile {
        UserProfile {
            user_id: user,
            screen_name: format!("user{user}"),
            friends_count: None,
            followers_count: None,
            name_seen: (ts("2020-03-01T00:00:00Z"), 0),
            counts_seen: None,
        }
    }

    fn corpus_of(ids: &[TweetId]) -> Corpus {
        let records = ids
            .iter()
            .map(|&id| tweet(id, 1, "2020-03-01T12:00:00Z", &format!("text {id}")))
            .collect();
        Corpus::new(records, vec![stub_profile(1)], TrackingWindow::default())
    }

    fn write_fixture(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut file = tempfile::Builder::new()
            .suffix(".ndjson")
            .tempfile()
            .unwrap();
        for line in lines {
            writeln!(file, "{line}").unwrap();
        }
        file.flush().unwrap();
        file
    }

    const VALID_1: &str = r#"{"id":1,"user_id":10,"user_screen_name":"alice","created_at":"2020-03-01T08:00:00Z","text":"first","friends_count":50,"followers_count":100}"#;
    const VALID_2: &str = r#"{"id":2,"user_id":10,"user_screen_name":"alice","created_at":"2020-03-02T08:00:00Z","text":"second"}"#;
    const VALID_3: &str = r#"{"id":3,"user_id":11,"user_screen_name":"bob","created_at":"2020-03-03T08:00:00Z","text":"RT @alice: first","retweeted_user_id":10,"retweeted_tweet_id":1}"#;

    #[test]
    fn parses_well_formed_file() {
        let file = write_fixture(&[VALID_1, VALID_2, VALID_3]);
        let parsed =
            parse_corpus_file(file.path(), CorpusFormat::Ndjson, IngestOptions::default())
                .unwrap();
        assert_eq!(parsed.corpus.tweet_count(), 3);
        assert_eq!(parsed.malformed_lines, 0);
        assert_eq!(parsed.corpus.user_count(), 2);
        let rt = &parsed.corpus.tweets()[2];
        assert_eq!(rt.kind(), TweetKind::Retweet);
        assert_eq!(rt.retweeted_user_id, Some(10));
        let alice = parsed.corpus.user(10).unwrap();
        assert_eq!(alice.friends_count, Some(50));
        assert!(alice.is_complete());
        assert!(!parsed.corpus.user(11).unwrap().is_complete());
    }

    #[test]
    fn empty_file_yields_empty_corpus() {
        let file = write_fixture(&[]);
        let parsed =
            parse_corpus_file(file.path(), CorpusFormat::Ndjson, IngestOptions::default())
                .unwrap();
        assert_eq!(parsed.corpus.tweet_count(), 0);
        assert_eq!(parsed.malformed_lines, 0);
    }

    #[test]
    fn truncated_line_is_counted_not_dropped_silently() {
        let truncated = &VALID_3[..VALID_3.len() / 2];
        let file = write_fixture(&[VALID_1, VALID_2, truncated]);
        let parsed =
            parse_corpus_file(file.path(), CorpusFormat::Ndjson, IngestOptions::default())
                .unwrap();
        assert_eq!(parsed.corpus.tweet_count(), 2);
        assert_eq!(parsed.malformed_lines, 1);
        assert_eq!(parsed.total_lines, 3);
    }

    #[test]
    fn mostly_malformed_file_is_a_format_error() {
        let file = write_fixture(&[VALID_1, "not json", "{\"id\":5}"]);
        let err = parse_corpus_file(file.path(), CorpusFormat::Ndjson, IngestOptions::default())
            .unwrap_err();
        assert!(matches!(err, IngestError::Format { malformed: 2, total: 3, .. }));
    }

    #[test]
    fn unreadable_file_is_an_io_error() {
        let err = parse_corpus_file(
            Path::new("/nonexistent/corpus.ndjson"),
            CorpusFormat::Ndjson,
            IngestOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, IngestError::Io { .. }));
    }

    #[test]
    fn empty_text_is_malformed() {
        let blank = r#"{"id":9,"user_id":10,"user_screen_name":"alice","created_at":"2020-03-01T08:00:00Z","text":"  "}"#;
        let file = write_fixture(&[VALID_1, VALID_2, blank]);
        let parsed =
            parse_corpus_file(file.path(), CorpusFormat::Ndjson, IngestOptions::default())
                .unwrap();
        assert_eq!(parsed.malformed_lines, 1);
    }

    #[test]
    fn gzip_variant_parses_by_extension() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("crawl.ndjson.gz");
        let file = File::create(&path).unwrap();
        let mut enc = flate2::write::GzEncoder::new(file, flate2::Compression::default());
        writeln!(enc, "{VALID_1}").unwrap();
        writeln!(enc, "{VALID_2}").unwrap();
        enc.finish().unwrap();
        let parsed =
            parse_corpus_file(&path, CorpusFormat::Ndjson, IngestOptions::default()).unwrap();
        assert_eq!(parsed.corpus.tweet_count(), 2);
    }

    #[test]
    fn merge_unions_by_tweet_id() {
        let merged = merge_corpora(vec![corpus_of(&[1, 2]), corpus_of(&[2, 3])]);
        let ids: Vec<TweetId> = merged.tweets().iter().map(|t| t.tweet_id).collect();
        assert_eq!(ids, vec![1, 2, 3]);
    }

    #[test]
    fn merge_of_nothing_is_an_empty_corpus() {
        let merged = merge_corpora(Vec::new());
        assert_eq!(merged.tweet_count(), 0);
        assert_eq!(merged.user_count(), 0);
        assert_eq!(merged.window(), TrackingWindow::default());
    }

    #[test]
    fn merge_of_single_corpus_is_identity() {
        let corpus = corpus_of(&[4, 5, 6]);
        let merged = merge_corpora(vec![corpus.clone()]);
        assert_eq!(merged, corpus);
    }

    #[test]
    fn three_crawls_with_shared_ids_match_distinct_count() {
        // Crawls of 10 records each sharing 5 ids in total across the three.
        let a: Vec<TweetId> = (0..10).collect();
        let b: Vec<TweetId> = (7..17).collect();
        let c: Vec<TweetId> = (15..25).collect();
        // Brute-force distinct-id oracle over the raw fixture.
        let distinct: BTreeSet<TweetId> =
            a.iter().chain(b.iter()).chain(c.iter()).copied().collect();
        assert_eq!(distinct.len(), 25);
        let merged = merge_corpora(vec![corpus_of(&a), corpus_of(&b), corpus_of(&c)]);
        assert_eq!(merged.tweet_count(), 25);
    }

    #[test]
    fn merge_resolves_profile_conflicts_to_latest_observation() {
        let older = tweet(1, 7, "2020-03-01T00:00:00Z", "old");
        let newer = tweet(2, 7, "2020-04-01T00:00:00Z", "new");
        let corpus_a = Corpus::new(
            vec![older.clone()],
            vec![profile_from_record(&older, "early".into(), Some(10), Some(10))],
            TrackingWindow::default(),
        );
        let corpus_b = Corpus::new(
            vec![newer.clone()],
            vec![profile_from_record(&newer, "late".into(), Some(99), Some(11))],
            TrackingWindow::default(),
        );
        for corpora in [
            vec![corpus_a.clone(), corpus_b.clone()],
            vec![corpus_b, corpus_a],
        ] {
            let merged = merge_corpora(corpora);
            let profile = merged.user(7).unwrap();
            assert_eq!(profile.screen_name, "late");
            assert_eq!(profile.friends_count, Some(99));
        }
    }

    #[test]
    fn merge_keeps_counts_from_records_that_carry_them() {
        let counted = tweet(1, 7, "2020-03-01T00:00:00Z", "with counts");
        let bare = tweet(2, 7, "2020-04-01T00:00:00Z", "later, no counts");
        let merged = merge_corpora(vec![Corpus::new(
            vec![counted.clone(), bare.clone()],
            vec![
                profile_from_record(&counted, "a".into(), Some(3), Some(4)),
                profile_from_record(&bare, "b".into(), None, None),
            ],
            TrackingWindow::default(),
        )]);
        let profile = merged.user(7).unwrap();
        assert_eq!(profile.screen_name, "b");
        assert_eq!(profile.friends_count, Some(3));
        assert_eq!(profile.followers_count, Some(4));
    }

    #[test]
    fn filter_keeps_in_window_tweets() {
        let window = TrackingWindow::new(ts("2020-03-01T00:00:00Z"), ts("2020-03-10T00:00:00Z"))
            .unwrap();
        let records = vec![
            tweet(1, 1, "2020-03-01T00:00:00Z", "on start"),
            tweet(2, 1, "2020-03-05T12:00:00Z", "inside"),
            tweet(3, 1, "2020-03-10T00:00:00Z", "on end"),
            tweet(4, 1, "2020-03-10T00:00:01Z", "past end"),
            tweet(5, 1, "2020-02-29T23:59:59Z", "before start"),
        ];
        let corpus = Corpus::new(records, vec![stub_profile(1)], TrackingWindow::default());
        let filtered = filter_window(corpus, window);
        let ids: Vec<TweetId> = filtered.tweets().iter().map(|t| t.tweet_id).collect();
        assert_eq!(ids, vec![1, 2, 3]);
        assert_eq!(filtered.window(), window);
    }

    #[test]
    fn filter_to_disjoint_window_empties_corpus() {
        let corpus = corpus_of(&[1, 2, 3]);
        let window = TrackingWindow::new(ts("2021-01-01T00:00:00Z"), ts("2021-02-01T00:00:00Z"))
            .unwrap();
        assert_eq!(filter_window(corpus, window).tweet_count(), 0);
    }

    #[test]
    fn default_window_duration_covers_twelve_weeks() {
        let window = TrackingWindow::default();
        let hours = window.duration_hours();
        assert!(
            (2015.9..=2016.0).contains(&hours),
            "duration_hours = {hours}"
        );
        assert_eq!(window.num_days(), 84);
    }

    #[test]
    fn day_index_buckets_from_window_start() {
        let window = TrackingWindow::default();
        assert_eq!(window.day_index(window.start()), Some(0));
        assert_eq!(window.day_index(ts("2020-02-27T23:59:59Z")), Some(0));
        assert_eq!(window.day_index(ts("2020-02-28T00:00:00Z")), Some(1));
        assert_eq!(window.day_index(window.end()), Some(83));
        assert_eq!(window.day_index(ts("2020-05-21T00:00:00Z")), None);
    }

    #[test]
    fn invalid_window_is_rejected() {
        let at = ts("2020-03-01T00:00:00Z");
        assert!(TrackingWindow::new(at, at).is_err());
        assert!(TrackingWindow::new(at, at - chrono::Duration::hours(1)).is_err());
    }

    #[test]
    fn rt_prefix_resolution_is_opt_in() {
        let line = r#"{"id":4,"user_id":11,"user_screen_name":"bob","created_at":"2020-03-03T09:00:00Z","text":"RT @alice: first"}"#;
        let file = write_fixture(&[VALID_1, line]);
        let plain = parse_corpus_file(file.path(), CorpusFormat::Ndjson, IngestOptions::default())
            .unwrap();
        assert!(!plain.corpus.tweets()[1].is_retweet());

        let inferred = parse_corpus_file(
            file.path(),
            CorpusFormat::Ndjson,
            IngestOptions {
                infer_rt_prefix: true,
            },
        )
        .unwrap();
        let rt = &inferred.corpus.tweets()[1];
        assert!(rt.is_retweet());
        assert_eq!(rt.retweeted_user_id, Some(10));
    }

    #[test]
    fn rt_prefix_with_unknown_name_stays_original() {
        let line = r#"{"id":4,"user_id":11,"user_screen_name":"bob","created_at":"2020-03-03T09:00:00Z","text":"RT @stranger: hello"}"#;
        let file = write_fixture(&[VALID_1, line]);
        let parsed = parse_corpus_file(
            file.path(),
            CorpusFormat::Ndjson,
            IngestOptions {
                infer_rt_prefix: true,
            },
        )
        .unwrap();
        assert!(!parsed.corpus.tweets()[1].is_retweet());
    }

    #[test]
    fn ndjson_round_trip_preserves_corpus() {
        let file = write_fixture(&[VALID_1, VALID_2, VALID_3]);
        let parsed =
            parse_corpus_file(file.path(), CorpusFormat::Ndjson, IngestOptions::default())
                .unwrap();
        let mut bytes = Vec::new();
        parsed.corpus.write_ndjson(&mut bytes).unwrap();
        let reparsed_file = write_fixture(&[std::str::from_utf8(&bytes).unwrap().trim_end()]);
        let reparsed = parse_corpus_file(
            reparsed_file.path(),
            CorpusFormat::Ndjson,
            IngestOptions::default(),
        )
        .unwrap();
        assert_eq!(reparsed.corpus.tweets(), parsed.corpus.tweets());
        // Counts survive the round trip even though the checkpoint
        // denormalizes them onto every line.
        assert_eq!(
            reparsed.corpus.user(10).unwrap().friends_count,
            parsed.corpus.user(10).unwrap().friends_count
        );
    }

    proptest! {
        #[test]
        fn merge_is_idempotent(ids in proptest::collection::vec(0u64..500, 0..40)) {
            let corpus = corpus_of(&ids);
            let merged = merge_corpora(vec![corpus.clone(), corpus.clone()]);
            prop_assert_eq!(merged.tweets(), corpus.tweets());
        }

        #[test]
        fn merge_is_order_insensitive_on_id_sets(
            a in proptest::collection::vec(0u64..200, 0..30),
            b in proptest::collection::vec(0u64..200, 0..30),
            c in proptest::collection::vec(0u64..200, 0..30),
        ) {
            let ids = |corpus: &Corpus| -> BTreeSet<TweetId> {
                corpus.tweets().iter().map(|t| t.tweet_id).collect()
            };
            let fwd = merge_corpora(vec![corpus_of(&a), corpus_of(&b), corpus_of(&c)]);
            let rev = merge_corpora(vec![corpus_of(&c), corpus_of(&a), corpus_of(&b)]);
            prop_assert_eq!(ids(&fwd), ids(&rev));
        }

        #[test]
        fn tweet_ids_unique_after_merge(
            a in proptest::collection::vec(0u64..100, 0..50),
            b in proptest::collection::vec(0u64..100, 0..50),
        ) {
            let merged = merge_corpora(vec![corpus_of(&a), corpus_of(&b)]);
            let ids: Vec<TweetId> = merged.tweets().iter().map(|t| t.tweet_id).collect();
            let mut deduped = ids.clone();
            deduped.dedup();
            prop_assert_eq!(ids.len(), deduped.len());
            prop_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        }

        #[test]
        fn filter_window_is_idempotent(offsets in proptest::collection::vec(0i64..200_000, 0..50)) {
            let base = ts("2020-03-01T00:00:00Z");
            let records = offsets.iter().enumerate().map(|(i, &off)| {
                tweet(i as u64, 1, "2020-03-01T00:00:00Z", &format!("t{i}"))
                    .with_created_at(base + chrono::Duration::seconds(off))
            }).collect::<Vec<_>>();
            let corpus = Corpus::new(records, vec![stub_profile(1)], TrackingWindow::default());
            let window = TrackingWindow::new(base, base + chrono::Duration::hours(24)).unwrap();
            let once = filter_window(corpus, window);
            let twice = filter_window(once.clone(), window);
            prop_assert_eq!(once, twice);
        }
    }

    impl TweetRecord {
        fn with_created_at(mut self, at: DateTime<Utc>) -> Self {
            self.created_at = at;
            self
        }
    }
}
