//! Train the buffered classifier, save it, reload it and score a prefix.
//!
//! ```bash
//! cargo run --release --example train_buffered
//! ```

use goalpred::experiments::{train_variant, RunConfig};
use goalpred::prelude::*;

fn main() -> Result<()> {
    let ds = generate(&GenConfig {
        segments: 120,
        subjects: (1..=6).map(|i| format!("p{i}")).collect(),
        seed: 5,
        ..GenConfig::default()
    })?;
    let (train_set, test_set) = split_by_subject(
        &ds,
        &subject_set(&["p1", "p2", "p3", "p4"]),
        &subject_set(&["p5", "p6"]),
    )?;

    let mut cfg = RunConfig::default();
    cfg.train.epochs = 3;
    let tv = train_variant(&train_set, &VariantSpec::lstm_buff(), &cfg)?;
    println!("trained lstm_buff on {} segments", train_set.segments.len());

    // Persist and reload: the container holds the network shape, channels,
    // normalizer and all weights.
    let mut model = ModelFile::new(
        tv.classifier.network,
        tv.classifier.features.clone(),
        tv.classifier.norm.clone(),
        tv.classifier.params.clone(),
    );
    model.variant = Some("lstm_buff".into());
    model.buffer_len = tv.spec.buffer_len;
    let path = std::env::temp_dir().join("goalpred_example_model.json");
    save_model(&model, &path)?;
    let reloaded = load_model(&path)?;
    println!("model round-trips through {}", path.display());

    // Score one test segment at a mid-segment prefix: one score per goal,
    // produced by the same shared network.
    let clf = GoalClassifier::from_model_file(&reloaded);
    let seg = &test_set.segments[0];
    let prefix = seg.len() / 2;
    let scores = predict_scores(seg, prefix, &test_set.goal_set, &clf, reloaded.buffer_len)?;
    println!("\nscores at frame {prefix} (truth: {}):", seg.picked_goal);
    for (goal, score) in test_set.goal_set.goals().iter().zip(&scores) {
        let marker = if goal.id == seg.picked_goal {
            "  <- truth"
        } else {
            ""
        };
        println!("  {:<4} {score:.3}{marker}", goal.id);
    }
    let pick = decide_argmax(&scores);
    println!("argmax decision: {}", test_set.goal_set.get(pick).id);
    Ok(())
}
