//! Generate a synthetic pick dataset and write train/test splits.
//!
//! ```bash
//! cargo run --example generate_dataset
//! ```

use goalpred::prelude::*;

fn main() -> Result<()> {
    let cfg = GenConfig {
        segments: 60,
        n_goals: 8,
        n_macros: 3,
        gaze_fixation_prob: 0.7,
        seed: 11,
        ..GenConfig::default()
    };
    let dataset = generate(&cfg)?;

    println!(
        "generated {} segments against {} goals on {} macro locations",
        dataset.segments.len(),
        dataset.goal_set.len(),
        cfg.n_macros
    );
    for goal in dataset.goal_set.goals() {
        println!(
            "  {:>3} at ({:+.2}, {:+.2}, {:.2})  macro {}",
            goal.id, goal.position.x, goal.position.y, goal.position.z, goal.macro_id
        );
    }

    // Subject-based split, exactly like the evaluation protocol expects.
    let (train, test) = split_by_subject(
        &dataset,
        &subject_set(&["p1", "p2", "p3", "p4"]),
        &subject_set(&["p5", "p6"]),
    )?;
    let dir = std::env::temp_dir().join("goalpred_example");
    std::fs::create_dir_all(&dir).expect("temp dir");
    train.save(&dir.join("train.jsonl"))?;
    test.save(&dir.join("test.jsonl"))?;
    println!(
        "wrote {} train / {} test segments under {}",
        train.segments.len(),
        test.segments.len(),
        dir.display()
    );
    Ok(())
}
