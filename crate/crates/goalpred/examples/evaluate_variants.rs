//! Train and compare the model roster on one synthetic split: whole-history
//! LSTM, the reduced-feature variant, the buffered variant and the
//! gaze-enhanced decision rule, all against the gaze baseline.
//!
//! ```bash
//! cargo run --release --example evaluate_variants
//! ```

use goalpred::experiments::{run_variants, RunConfig};
use goalpred::prelude::*;

fn main() -> Result<()> {
    let ds = generate(&GenConfig {
        segments: 150,
        subjects: (1..=6).map(|i| format!("p{i}")).collect(),
        seed: 23,
        duration_s: (2.0, 3.5),
        ..GenConfig::default()
    })?;
    let (train_set, test_set) = split_by_subject(
        &ds,
        &subject_set(&["p1", "p2", "p3", "p4"]),
        &subject_set(&["p5", "p6"]),
    )?;

    let mut cfg = RunConfig::default();
    cfg.train.epochs = 3; // keep the example quick; the full protocol uses 5
    let roster = [
        VariantSpec::lstm(),
        VariantSpec::lstm_select(),
        VariantSpec::lstm_buff(),
        VariantSpec::enhanced(),
    ];
    let report = run_variants(&train_set, &test_set, &roster, &cfg)?;

    println!("{:<14} {:>8}", "method", "AUC");
    for (name, m) in &report.methods {
        println!("{name:<14} {:>8.2}", m.auc);
    }
    println!(
        "\nfingerprint: seed {}, test hash {}",
        report.fingerprint.seed, report.fingerprint.dataset_hash
    );
    Ok(())
}
