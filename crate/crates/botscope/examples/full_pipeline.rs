//! End-to-end run: ingest archive files, detect bot-like accounts, rank
//! influence, and write the four report files.
//!
//! ```bash
//! cargo run -p botscope --example full_pipeline
//! ```

use botscope::pipeline::{run_pipeline, PipelineOptions};
use botscope::synth::{generate_corpus, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;

    // Stand-in for real crawl archives.
    let (corpus, _) = generate_corpus(&SynthConfig::default())?;
    let input = dir.path().join("crawl.ndjson");
    corpus.write_ndjson_file(&input)?;
    println!("archive: {} ({} tweets)", input.display(), corpus.tweet_count());

    let out = dir.path().join("reports");
    let summary = run_pipeline(&[input], &PipelineOptions::default(), &out)?;

    println!("\nsummary:");
    println!("  users          {}", summary.total_users);
    println!("  tweets         {}", summary.total_tweets);
    println!("  highly active  {}", summary.highly_active_count);
    println!(
        "  flagged        {} ({}% of active)",
        summary.flagged_count, summary.flagged_share_percent
    );
    println!("  flagged tweets {}", summary.flagged_tweet_count);
    println!(
        "  verdicts       {} threat / {} harmless / {} not flagged",
        summary.verdicts.threat, summary.verdicts.harmless, summary.verdicts.not_flagged
    );

    println!("\nreport files:");
    for name in ["metrics.csv", "ranked.csv", "graph_edges.csv", "summary.json"] {
        let path = out.join(name);
        println!("  {} ({} bytes)", path.display(), std::fs::metadata(&path)?.len());
    }

    println!("\nranked.csv head:");
    let ranked = std::fs::read_to_string(out.join("ranked.csv"))?;
    for line in ranked.lines().take(6) {
        println!("  {line}");
    }
    Ok(())
}
