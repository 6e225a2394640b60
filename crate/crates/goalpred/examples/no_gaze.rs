//! What if no eye tracker is available? Train the hand+head variant (40
//! hidden units, no gaze channels) and compare it with the best single body
//! cues. The learned combination beats any one of them.
//!
//! ```bash
//! cargo run --release --example no_gaze
//! ```

use goalpred::experiments::{run_no_gaze, RunConfig};
use goalpred::prelude::*;

fn main() -> Result<()> {
    let ds = generate(&GenConfig {
        segments: 150,
        subjects: (1..=6).map(|i| format!("p{i}")).collect(),
        seed: 57,
        ..GenConfig::default()
    })?;
    let (train_set, test_set) = split_by_subject(
        &ds,
        &subject_set(&["p1", "p2", "p3", "p4"]),
        &subject_set(&["p5", "p6"]),
    )?;

    let mut cfg = RunConfig::default();
    cfg.train.epochs = 3;
    let report = run_no_gaze(&train_set, &test_set, &cfg)?;

    println!("{:<12} {:>8}", "method", "AUC");
    for (name, m) in &report.methods {
        println!("{name:<12} {:>8.2}", m.auc);
    }
    let spec = VariantSpec::no_gaze();
    println!(
        "\nno_gaze uses channels {:?} with {} hidden units",
        spec.channels.iter().map(|c| c.name()).collect::<Vec<_>>(),
        spec.hidden_units
    );
    Ok(())
}
