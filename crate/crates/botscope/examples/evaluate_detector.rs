//! Score the detector against ground-truth labels and sweep the threshold
//! strictness to show the precision/recall trade-off.
//!
//! ```bash
//! cargo run -p botscope --example evaluate_detector
//! ```

use botscope::metrics::{
    derive_thresholds, select_highly_active, DetectionThresholds, TextNormalization,
    ThresholdOverrides,
};
use botscope::synth::{evaluate_detector, generate_corpus, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (corpus, truth) = generate_corpus(&SynthConfig::default())?;
    let active = select_highly_active(&corpus, 150, 14);
    let thresholds = derive_thresholds(
        &corpus,
        &active,
        &ThresholdOverrides::default(),
        TextNormalization::None,
    )?;

    let matrix = evaluate_detector(&corpus, &truth, &thresholds, TextNormalization::None)?;
    println!("derived thresholds:");
    println!("  tu < {:.4}, tfq > {:.4}, ffr > {:.1}\n", thresholds.tu_threshold, thresholds.tfq_threshold, thresholds.ffr_threshold);
    println!("confusion matrix on {} labeled accounts:", truth.len());
    println!("  tp {} / fp {} / fn {} / tn {}", matrix.true_positives, matrix.false_positives, matrix.false_negatives, matrix.true_negatives);
    println!("  precision {:.3}  recall {:.3}  f1 {:.3}", matrix.precision, matrix.recall, matrix.f1);

    // Stricter thresholds trade recall away; precision stays clean here
    // because humans sit far below every cut.
    println!("\nstrictness sweep:");
    println!("{:>6} {:>10} {:>10} {:>8} {:>8}", "step", "tu_thr", "tfq_thr", "prec", "recall");
    for step in 0..5 {
        let s = step as f64;
        let tightened = DetectionThresholds {
            tu_threshold: (thresholds.tu_threshold - 0.22 * s).max(0.0),
            tfq_threshold: thresholds.tfq_threshold + 1.5 * s,
            ffr_threshold: thresholds.ffr_threshold + 2.0 * s,
            ..thresholds
        };
        let swept = evaluate_detector(&corpus, &truth, &tightened, TextNormalization::None)?;
        println!(
            "{:>6} {:>10.4} {:>10.4} {:>8.3} {:>8.3}",
            step, tightened.tu_threshold, tightened.tfq_threshold, swept.precision, swept.recall
        );
    }
    Ok(())
}
