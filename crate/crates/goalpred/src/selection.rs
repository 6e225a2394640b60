//! Feature-selection tooling: a channel-correlation matrix over the pooled
//! sample population and single-cue baseline predictors.

use crate::datamodel::{Dataset, Frame, GoalSet};
use crate::error::{Error, Result};
use crate::features::{extract_frame_features, FeatureChannel, FeatureConfig};

/// Pearson correlation coefficients between channels, computed over every
/// (segment, goal, frame) sample. Channels with zero variance are flagged as
/// degenerate and their rows/columns hold NaN rather than a silent zero.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    channels: Vec<FeatureChannel>,
    /// Row-major F x F.
    r: Vec<f64>,
    degenerate: Vec<bool>,
}

impl CorrelationMatrix {
    pub fn channels(&self) -> &[FeatureChannel] {
        &self.channels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.r[i * self.channels.len() + j]
    }

    /// False when either channel had zero variance.
    pub fn is_defined(&self, i: usize, j: usize) -> bool {
        !self.degenerate[i] && !self.degenerate[j]
    }

    pub fn is_degenerate_channel(&self, i: usize) -> bool {
        self.degenerate[i]
    }

    /// CSV with channel names as header row and leading column. Undefined
    /// entries render as `nan`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("channel");
        for c in &self.channels {
            out.push(',');
            out.push_str(c.name());
        }
        out.push('\n');
        for (i, c) in self.channels.iter().enumerate() {
            out.push_str(c.name());
            for j in 0..self.channels.len() {
                out.push(',');
                if self.is_defined(i, j) {
                    out.push_str(&format!("{:.6}", self.get(i, j)));
                } else {
                    out.push_str("nan");
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Pearson r of two equally long series; `None` when either has zero
/// variance (or fewer than two points).
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "series must have equal length");
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for k in 0..n {
        let dx = x[k] - mx;
        let dy = y[k] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx < VAR_EPS || syy < VAR_EPS {
        return None;
    }
    Some(sxy / (sxx.sqrt() * syy.sqrt()))
}

const VAR_EPS: f64 = 1e-24;

/// Pairwise Pearson correlations of the configured channels over the pooled
/// (segment, goal, frame) population of `d`.
pub fn correlation_matrix(d: &Dataset, cfg: &FeatureConfig) -> Result<CorrelationMatrix> {
    cfg.validate()?;
    let f = cfg.channels.len();

    // Pass 1: means.
    let mut sums = vec![0.0; f];
    let mut n = 0u64;
    for seg in &d.segments {
        for goal in d.goal_set.goals() {
            let m = extract_frame_features(&seg.frames, goal, cfg)?;
            for r in 0..m.rows() {
                for (c, v) in m.row(r).iter().enumerate() {
                    sums[c] += v;
                }
            }
            n += m.rows() as u64;
        }
    }
    if n < 2 {
        return Err(Error::Invalid(format!(
            "correlation needs at least 2 samples per channel, got {n}"
        )));
    }
    let means: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();

    // Pass 2: centered second moments.
    let mut cov = vec![0.0; f * f];
    for seg in &d.segments {
        for goal in d.goal_set.goals() {
            let m = extract_frame_features(&seg.frames, goal, cfg)?;
            for r in 0..m.rows() {
                let row = m.row(r);
                for i in 0..f {
                    let di = row[i] - means[i];
                    for j in i..f {
                        cov[i * f + j] += di * (row[j] - means[j]);
                    }
                }
            }
        }
    }

    let degenerate: Vec<bool> = (0..f).map(|i| cov[i * f + i] < VAR_EPS).collect();
    let mut r = vec![f64::NAN; f * f];
    for i in 0..f {
        for j in i..f {
            if !degenerate[i] && !degenerate[j] {
                let denom = (cov[i * f + i] * cov[j * f + j]).sqrt();
                let v = cov[i * f + j] / denom;
                r[i * f + j] = v;
                r[j * f + i] = v;
            }
        }
    }

    Ok(CorrelationMatrix {
        channels: cfg.channels.clone(),
        r,
        degenerate,
    })
}

/// Single-cue baseline: the goal whose channel value at the last prefix frame
/// is smallest (largest for `cumulative_gaze`). Ties break toward the lowest
/// goal ordinal. Returns the goal ordinal; panics if the prefix is empty.
///
/// A degenerate orientation (goal exactly at the joint) counts as perfectly
/// indicated (value 0), since the cue cannot get any closer.
pub fn baseline_predict(
    prefix: &[Frame],
    goals: &GoalSet,
    channel: FeatureChannel,
    cfg: &FeatureConfig,
) -> usize {
    let values = baseline_values(prefix, goals, channel, cfg);
    baseline_decide(&values, channel)
}

/// The per-goal cue values the baseline compares (last-frame values).
pub fn baseline_values(
    prefix: &[Frame],
    goals: &GoalSet,
    channel: FeatureChannel,
    cfg: &FeatureConfig,
) -> Vec<f64> {
    assert!(
        !prefix.is_empty(),
        "baseline_predict requires at least one frame"
    );
    let one = FeatureConfig {
        channels: vec![channel],
        gaze_fix_threshold_m: cfg.gaze_fix_threshold_m,
        gaze_metric: cfg.gaze_metric,
    };
    goals
        .goals()
        .iter()
        .map(|goal| match extract_frame_features(prefix, goal, &one) {
            Ok(m) => m.at(m.rows() - 1, 0),
            // Goal coincides with the joint: treat as perfectly aligned.
            Err(_) => 0.0,
        })
        .collect()
}

fn baseline_decide(values: &[f64], channel: FeatureChannel) -> usize {
    let larger = channel.prefers_larger();
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        let better = if larger {
            *v > values[best]
        } else {
            *v < values[best]
        };
        if better {
            best = i;
        }
    }
    best
}
