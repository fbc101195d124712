//! Generate a seeded synthetic corpus with ground-truth labels and write
//! it out in the archive format the rest of the toolkit consumes.
//!
//! ```bash
//! cargo run -p botscope --example synth_corpus
//! ```

use botscope::synth::{generate_corpus, AccountLabel, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = SynthConfig {
        seed: 42,
        ..SynthConfig::default()
    };
    let (corpus, truth) = generate_corpus(&config)?;

    println!("seed {} over {:.0} hours", config.seed, corpus.window().duration_hours());
    println!(
        "{} accounts ({} bots), {} tweets",
        truth.len(),
        truth.bot_count(),
        corpus.tweet_count()
    );

    for label in [
        AccountLabel::Human,
        AccountLabel::Repeater,
        AccountLabel::Flooder,
        AccountLabel::FollowSpammer,
        AccountLabel::Mixed,
    ] {
        let count = truth.iter().filter(|&(_, l)| l == label).count();
        println!("  {:<15} {count}", label.as_str());
    }

    let dir = tempfile::tempdir()?;
    let corpus_path = dir.path().join("corpus.ndjson");
    corpus.write_ndjson_file(&corpus_path)?;
    let mut labels_bytes = Vec::new();
    truth.write_csv(&mut labels_bytes)?;
    let labels_path = dir.path().join("labels.csv");
    std::fs::write(&labels_path, labels_bytes)?;

    println!("\nwrote {}", corpus_path.display());
    println!("wrote {}", labels_path.display());

    // A few sample lines of the archive format.
    let text = std::fs::read_to_string(&corpus_path)?;
    println!("\nfirst lines of the archive:");
    for line in text.lines().take(3) {
        println!("  {line}");
    }
    Ok(())
}
