//! Channel-correlation analysis: which cues are redundant?
//!
//! High pairwise correlation between the body orientation channels is what
//! justifies keeping only one of them in the reduced feature set, while the
//! left-hand channels correlate poorly with everything (they carry no goal
//! information here).
//!
//! ```bash
//! cargo run --example feature_correlation
//! ```

use goalpred::prelude::*;

fn main() -> Result<()> {
    let ds = generate(&GenConfig {
        segments: 40,
        seed: 9,
        ..GenConfig::default()
    })?;
    let cfg = FeatureConfig::full();
    let matrix = correlation_matrix(&ds, &cfg)?;

    println!("{}", matrix.to_csv());

    let idx = |c: FeatureChannel| cfg.channels.iter().position(|x| *x == c).unwrap();
    let pairs = [
        (FeatureChannel::TorsoOri, FeatureChannel::PelvisOri),
        (FeatureChannel::TorsoOri, FeatureChannel::RshoulderOri),
        (FeatureChannel::HandEuc, FeatureChannel::PelvisEuc),
        (FeatureChannel::LhandOri, FeatureChannel::TorsoOri),
        (FeatureChannel::Gaze, FeatureChannel::CumulativeGaze),
    ];
    println!("selected pairs:");
    for (a, b) in pairs {
        println!("  r({a}, {b}) = {:+.3}", matrix.get(idx(a), idx(b)));
    }
    Ok(())
}
