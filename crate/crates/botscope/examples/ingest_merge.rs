//! Parse several crawl files, merge them with duplicate removal, and
//! restrict the result to a tracking window.
//!
//! ```bash
//! cargo run -p botscope --example ingest_merge
//! ```

use botscope::ingest::{
    filter_window, merge_corpora, parse_corpus_file, CorpusFormat, IngestOptions, TrackingWindow,
};
use botscope::synth::{generate_corpus, HumanParams, SynthConfig};
use chrono::Duration;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;

    // Three overlapping "crawls": same generator, different slices.
    let (corpus, _) = generate_corpus(&SynthConfig {
        seed: 7,
        humans: HumanParams {
            count: 20,
            ..HumanParams::default()
        },
        ..SynthConfig::default()
    })?;
    let window = corpus.window();
    let thirds = [
        TrackingWindow::new(window.start(), window.start() + Duration::days(40))?,
        TrackingWindow::new(window.start() + Duration::days(20), window.start() + Duration::days(60))?,
        TrackingWindow::new(window.start() + Duration::days(40), window.end())?,
    ];
    let mut paths = Vec::new();
    for (i, slice) in thirds.into_iter().enumerate() {
        let crawl = filter_window(corpus.clone(), slice);
        let path = dir.path().join(format!("crawl{i}.ndjson"));
        crawl.write_ndjson_file(&path)?;
        println!("crawl{i}: {} tweets", crawl.tweet_count());
        paths.push(path);
    }

    let parsed: Vec<_> = paths
        .iter()
        .map(|p| parse_corpus_file(p, CorpusFormat::Ndjson, IngestOptions::default()))
        .collect::<Result<_, _>>()?;
    for (i, p) in parsed.iter().enumerate() {
        println!(
            "crawl{i} parsed: {} lines, {} malformed, {} duplicate ids",
            p.total_lines, p.malformed_lines, p.duplicate_tweet_ids
        );
    }

    let merged = merge_corpora(parsed.into_iter().map(|p| p.corpus).collect());
    println!(
        "\nmerged: {} tweets from {} users (duplicates across crawls removed)",
        merged.tweet_count(),
        merged.user_count()
    );
    assert_eq!(merged.tweet_count(), corpus.tweet_count());

    // Restrict to a two-week window of interest.
    let fortnight = TrackingWindow::new(
        window.start() + Duration::days(30),
        window.start() + Duration::days(44),
    )?;
    let filtered = filter_window(merged, fortnight);
    println!(
        "filtered to {:.0}h window: {} tweets",
        fortnight.duration_hours(),
        filtered.tweet_count()
    );
    Ok(())
}
