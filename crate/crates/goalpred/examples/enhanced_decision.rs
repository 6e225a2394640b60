//! The gaze-enhanced decision rule and its threshold grid search.
//!
//! When the classifier is confident (top score above the score threshold) it
//! wins outright; otherwise a directly fixated object (gaze ray within the
//! gaze threshold) takes over; otherwise the classifier decides anyway. The
//! thresholds are picked by exhaustive grid search on the training split.
//!
//! ```bash
//! cargo run --release --example enhanced_decision
//! ```

use goalpred::ensemble::{default_gaze_grid, default_score_grid};
use goalpred::experiments::{baseline_traces, train_variant, variant_traces, RunConfig};
use goalpred::prelude::*;

fn main() -> Result<()> {
    let ds = generate(&GenConfig {
        segments: 120,
        subjects: (1..=6).map(|i| format!("p{i}")).collect(),
        seed: 31,
        ..GenConfig::default()
    })?;
    let (train_set, test_set) = split_by_subject(
        &ds,
        &subject_set(&["p1", "p2", "p3", "p4"]),
        &subject_set(&["p5", "p6"]),
    )?;
    let mut cfg = RunConfig::default();
    cfg.train.epochs = 3;

    // Rule demonstration on hand-picked inputs.
    let rule = EnhancedConfig::default(); // score 0.49, gaze 0.2 m
    let confident = decide_enhanced(&[0.1, 0.6, 0.2], &[0.4, 0.9, 0.3], &rule);
    let fixated = decide_enhanced(&[0.3, 0.2, 0.1], &[0.5, 0.12, 0.8], &rule);
    let fallback = decide_enhanced(&[0.3, 0.2, 0.1], &[0.5, 0.4, 0.8], &rule);
    println!("confident classifier -> goal {confident}; fixation fallback -> goal {fixated}; score fallback -> goal {fallback}\n");

    // Grid search on the training split (the classifier is scored once; only
    // the decision rule is re-run per pair).
    let buff = train_variant(&train_set, &VariantSpec::lstm_buff(), &cfg)?;
    let (best, train_auc) = grid_search_thresholds(
        &train_set,
        &buff.classifier,
        buff.spec.buffer_len,
        &default_score_grid(),
        &default_gaze_grid(),
        &cfg.eval,
    )?;
    println!(
        "grid search winner: score_threshold {:.2}, gaze_threshold {:.2} m (train AUC {train_auc:.2})",
        best.score_threshold, best.gaze_threshold_m
    );

    // Evaluate enhanced vs. the plain argmax and the gaze baseline on test.
    let mut enhanced_spec = VariantSpec::enhanced();
    enhanced_spec.enhanced = Some(best);
    let enhanced = goalpred::experiments::TrainedVariant {
        spec: enhanced_spec,
        classifier: buff.classifier.clone(),
    };
    let table = [
        (
            "gaze baseline",
            auc(&accuracy_curve(
                &baseline_traces(&test_set, FeatureChannel::Gaze, &cfg)?,
                &cfg.eval,
            )?),
        ),
        (
            "lstm_buff (argmax)",
            auc(&accuracy_curve(
                &variant_traces(&test_set, &buff, &cfg)?,
                &cfg.eval,
            )?),
        ),
        (
            "enhanced",
            auc(&accuracy_curve(
                &variant_traces(&test_set, &enhanced, &cfg)?,
                &cfg.eval,
            )?),
        ),
    ];
    for (name, value) in table {
        println!("{name:<20} AUC {value:.2}");
    }
    Ok(())
}
