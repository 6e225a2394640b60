//! Accuracy-over-time curves and the AUC score.
//!
//! Evaluation looks at the final `window_s` seconds of every segment, with
//! the grasp at the window's end. A prediction is made every `stride_frames`
//! frames and held until the next one, so the per-frame accuracy curve is
//! piecewise constant. The AUC is the plain per-frame sum of the curve: a
//! 3-second window at 120 Hz has a maximum AUC of 360, and a uniform random
//! guesser over N goals converges to 360/N.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Evaluation protocol parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Evaluated time span before the grasp, seconds.
    pub window_s: f64,
    /// A new prediction is made every this many frames and held in between.
    pub stride_frames: usize,
    pub frame_rate_hz: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            window_s: 3.0,
            stride_frames: 10,
            frame_rate_hz: 120.0,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        let window_ok = self.window_s > 0.0;
        if !window_ok {
            return Err(Error::Config(format!(
                "window_s must be > 0, got {}",
                self.window_s
            )));
        }
        if self.stride_frames == 0 {
            return Err(Error::Config("stride_frames must be >= 1".into()));
        }
        let rate_ok = self.frame_rate_hz > 0.0;
        if !rate_ok {
            return Err(Error::Config(format!(
                "frame_rate_hz must be > 0, got {}",
                self.frame_rate_hz
            )));
        }
        Ok(())
    }

    /// Curve length in frames.
    pub fn window_frames(&self) -> usize {
        (self.window_s * self.frame_rate_hz).round() as usize
    }
}

/// One held prediction: made at `frame_index`, valid until the next step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub frame_index: usize,
    /// Per-goal scores in goal-set order (classifier confidences for model
    /// traces, raw cue values for baseline traces).
    pub scores: Vec<f64>,
    pub chosen: String,
}

/// All predictions over one segment plus the ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionTrace {
    /// Total frames in the segment; the grasp is at frame `n_frames - 1`.
    pub n_frames: usize,
    pub truth: String,
    pub steps: Vec<TraceStep>,
}

impl PredictionTrace {
    pub fn validate(&self) -> Result<()> {
        let mut prev: Option<usize> = None;
        for s in &self.steps {
            if s.frame_index >= self.n_frames {
                return Err(Error::Invalid(format!(
                    "trace step at frame {} outside segment of {} frames",
                    s.frame_index, self.n_frames
                )));
            }
            if let Some(p) = prev {
                if s.frame_index <= p {
                    return Err(Error::Invalid(format!(
                        "trace frame indices must strictly increase ({} after {})",
                        s.frame_index, p
                    )));
                }
            }
            prev = Some(s.frame_index);
        }
        Ok(())
    }
}

/// Frame indices at which predictions are made: 0, stride, 2*stride, ...
/// Starting at frame 0 means every frame of a segment has a held prediction.
pub fn stride_points(n_frames: usize, stride: usize) -> Vec<usize> {
    assert!(stride >= 1);
    (0..n_frames).step_by(stride).collect()
}

/// Accuracy at each frame offset of the evaluation window, pooled over all
/// traces. Offset `window_frames - 1` is the grasp frame. Segments shorter
/// than the window contribute only to the offsets they cover (the per-frame
/// denominator shrinks).
pub fn accuracy_curve(traces: &[PredictionTrace], cfg: &EvalConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    if traces.is_empty() {
        return Err(Error::Invalid(
            "accuracy_curve needs at least one trace".into(),
        ));
    }
    let len = cfg.window_frames();
    let mut correct = vec![0u64; len];
    let mut covered = vec![0u64; len];

    for trace in traces {
        trace.validate()?;
        let t_total = trace.n_frames as i64;
        let mut step_idx: usize = 0;
        // current = last step with frame_index <= frame, tracked incrementally.
        let mut current: Option<&TraceStep> = None;
        let first_frame = (t_total - len as i64).max(0);
        // Advance through any steps before the window starts.
        while step_idx < trace.steps.len()
            && (trace.steps[step_idx].frame_index as i64) < first_frame
        {
            current = Some(&trace.steps[step_idx]);
            step_idx += 1;
        }
        for frame in first_frame..t_total {
            while step_idx < trace.steps.len() && trace.steps[step_idx].frame_index as i64 <= frame
            {
                current = Some(&trace.steps[step_idx]);
                step_idx += 1;
            }
            let w = (frame - t_total + len as i64) as usize;
            covered[w] += 1;
            if let Some(step) = current {
                if step.chosen == trace.truth {
                    correct[w] += 1;
                }
            }
        }
    }

    Ok((0..len)
        .map(|w| {
            if covered[w] == 0 {
                0.0
            } else {
                correct[w] as f64 / covered[w] as f64
            }
        })
        .collect())
}

/// Area under the accuracy curve: the per-frame sum. Range [0, curve length].
pub fn auc(curve: &[f64]) -> f64 {
    curve.iter().sum()
}
