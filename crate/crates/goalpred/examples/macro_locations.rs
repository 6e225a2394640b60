//! Macro-location prediction: asking only *which cluster* (table or shelf)
//! the human is heading to. Coarsening predictions to macro level can only
//! raise accuracy, and motion cues shine here because the body commits to a
//! cluster long before the gaze settles on one object.
//!
//! ```bash
//! cargo run --release --example macro_locations
//! ```

use std::collections::BTreeMap;

use goalpred::experiments::{baseline_traces, run_macro, train_variant, variant_traces, RunConfig};
use goalpred::prelude::*;

fn main() -> Result<()> {
    // Lower fixation probability: the gaze wanders more, motion cues matter.
    let ds = generate(&GenConfig {
        segments: 120,
        gaze_fixation_prob: 0.5,
        subjects: (1..=6).map(|i| format!("p{i}")).collect(),
        seed: 41,
        ..GenConfig::default()
    })?;
    let (train_set, test_set) = split_by_subject(
        &ds,
        &subject_set(&["p1", "p2", "p3", "p4"]),
        &subject_set(&["p5", "p6"]),
    )?;
    let mut cfg = RunConfig::default();
    cfg.train.epochs = 3;

    let buff = train_variant(&train_set, &VariantSpec::lstm_buff(), &cfg)?;
    let mut traces = BTreeMap::new();
    traces.insert(
        "lstm_buff".to_string(),
        variant_traces(&test_set, &buff, &cfg)?,
    );
    traces.insert(
        "gaze".to_string(),
        baseline_traces(&test_set, FeatureChannel::Gaze, &cfg)?,
    );

    let report = run_macro(&test_set, &traces, &cfg)?;
    println!("{:<18} {:>8}", "method", "AUC");
    for (name, m) in &report.methods {
        println!("{name:<18} {:>8.2}", m.auc);
    }
    println!("\nmacro-level rows coarsen both prediction and truth to the goal's cluster id");
    Ok(())
}
