//! Single-cue baselines: each channel predicts on its own via per-frame
//! argmin across goals (argmax for cumulative gaze). Any model worth running
//! has to beat these.
//!
//! ```bash
//! cargo run --example cue_baselines
//! ```

use goalpred::experiments::{mogaze_reference_aucs, run_baselines, RunConfig};
use goalpred::prelude::*;

fn main() -> Result<()> {
    let ds = generate(&GenConfig {
        segments: 80,
        seed: 17,
        ..GenConfig::default()
    })?;
    let cfg = RunConfig::default();
    let report = run_baselines(&ds, &FeatureChannel::ALL, &cfg)?;

    let max_auc = cfg.eval.window_frames() as f64;
    let random = max_auc / ds.goal_set.len() as f64;
    println!("window max AUC {max_auc:.0}, random guess {random:.0}\n");
    println!(
        "{:<18} {:>10} {:>18}",
        "baseline", "this run", "reference (MoGaze)"
    );
    let mut rows: Vec<_> = report.methods.iter().collect();
    rows.sort_by(|a, b| b.1.auc.total_cmp(&a.1.auc));
    for (name, m) in rows {
        let reference = mogaze_reference_aucs()
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| format!("{v:.2}"))
            .unwrap_or_else(|| "-".into());
        println!("{name:<18} {:>10.2} {reference:>18}", m.auc);
    }
    println!("\n(reference column is from the original MoGaze capture, a different dataset;\n it is shown for context, not comparison)");
    Ok(())
}
