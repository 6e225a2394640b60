//! Extract the per-goal cue matrix for one segment and print it as CSV.
//!
//! ```bash
//! cargo run --example inspect_features
//! ```

use goalpred::prelude::*;

fn main() -> Result<()> {
    let ds = generate(&GenConfig {
        segments: 4,
        n_goals: 3,
        seed: 3,
        ..GenConfig::default()
    })?;
    let seg = &ds.segments[0];
    let cfg = FeatureConfig::reduced();

    // Header matches the CLI's feature dump: t, goal_id, then one column per channel.
    print!("t,goal_id");
    for c in &cfg.channels {
        print!(",{c}");
    }
    println!();

    for goal in ds.goal_set.goals() {
        let raw = extract_features(seg, goal, &cfg)?;
        // Print every 30th frame to keep the output readable.
        for t in (0..raw.rows()).step_by(30) {
            print!("{:.3},{}", seg.frames[t].t, goal.id);
            for v in raw.row(t) {
                print!(",{v:.4}");
            }
            println!();
        }
    }

    // Normalization: fit per-channel means on the whole set, then rescale.
    let stats = fit_normalizer(&ds, &cfg)?;
    println!("\ntraining-set channel means:");
    for (c, m) in stats.channels.iter().zip(&stats.means) {
        println!("  {c:<16} {m:.4}");
    }
    let normalized = apply_normalizer(&extract_features(seg, ds.goal_set.get(0), &cfg)?, &stats)?;
    println!(
        "normalized first-frame row for {}: {:?}",
        ds.goal_set.get(0).id,
        normalized
            .row(0)
            .iter()
            .map(|v| (v * 1000.0).round() / 1000.0)
            .collect::<Vec<_>>()
    );
    Ok(())
}
