//! Run the three-metric sampling procedure: activity gate, derived
//! uniqueness threshold, per-account TU/TFQ/FFR, and the bot-like verdict.
//!
//! ```bash
//! cargo run -p botscope --example detect_bots
//! ```

use botscope::metrics::{
    compute_user_metrics, derive_thresholds, select_highly_active, TextNormalization,
    ThresholdOverrides,
};
use botscope::synth::{generate_corpus, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (corpus, truth) = generate_corpus(&SynthConfig::default())?;
    println!(
        "corpus: {} tweets by {} users over {:.0} hours",
        corpus.tweet_count(),
        corpus.user_count(),
        corpus.window().duration_hours()
    );

    // Step 1: only highly active accounts enter the sample.
    let active = select_highly_active(&corpus, 150, 14);
    println!("highly active (>=150 tweets in a 14-day span): {}", active.len());

    // Step 2: thresholds. The uniqueness cut-off is derived from the
    // sample itself; frequency and ratio cut-offs are fixed.
    let thresholds = derive_thresholds(
        &corpus,
        &active,
        &ThresholdOverrides::default(),
        TextNormalization::None,
    )?;
    println!(
        "thresholds: tu < {:.4}, tfq > {:.4}, ffr > {:.1}",
        thresholds.tu_threshold, thresholds.tfq_threshold, thresholds.ffr_threshold
    );

    // Step 3: classify.
    let metrics = compute_user_metrics(&corpus, &active, &thresholds, TextNormalization::None);
    let flagged: Vec<_> = metrics.iter().filter(|m| m.bot_like).collect();
    println!(
        "flagged {} of {} evaluated accounts\n",
        flagged.len(),
        metrics.len()
    );

    println!("{:>8} {:>7} {:>7} {:>7} {:>6}  flags        truth", "user", "tweets", "tu", "tfq", "ffr");
    for m in &metrics {
        let marks = format!(
            "{}{}{}",
            if m.tu_flag { "U" } else { "-" },
            if m.tfq_flag { "F" } else { "-" },
            if m.ffr_flag { "R" } else { "-" },
        );
        let label = truth.label(m.user_id).map(|l| l.as_str()).unwrap_or("?");
        println!(
            "{:>8} {:>7} {:>7.3} {:>7.3} {:>6}  {marks} {}  {label}",
            m.user_id,
            m.tweet_count,
            m.tu,
            m.tfq,
            m.ffr.map(|v| format!("{v:.1}")).unwrap_or_else(|| "n/a".into()),
            if m.bot_like { "BOT? " } else { "clean" },
        );
    }
    Ok(())
}
