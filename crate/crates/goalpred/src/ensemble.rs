//! N-way inference: one shared binary classifier evaluated against every
//! goal's feature sequence, the argmax decision, the gaze-enhanced decision
//! rule, threshold grid search and macro-location coarsening.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::datamodel::{Dataset, Frame, GoalSet, Segment};
use crate::error::{Error, Result};
use crate::features::{
    apply_normalizer, extract_frame_features, gaze_ray_distance, FeatureChannel, FeatureConfig,
    NormStats,
};
use crate::lstm::{forward, prefix_scores, LstmParams, ModelFile, NetworkConfig};
use crate::metrics::{stride_points, EvalConfig, PredictionTrace, TraceStep};

// ---------------------------------------------------------------------------
// Configs
// ---------------------------------------------------------------------------

/// Thresholds of the gaze-enhanced decision rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnhancedConfig {
    /// The classifier wins outright above this score.
    pub score_threshold: f64,
    /// Direct-fixation cutoff on the per-goal gaze-ray distance, meters.
    pub gaze_threshold_m: f64,
}

impl Default for EnhancedConfig {
    fn default() -> Self {
        EnhancedConfig {
            score_threshold: 0.49,
            gaze_threshold_m: 0.2,
        }
    }
}

impl EnhancedConfig {
    pub fn validate(&self) -> Result<()> {
        let score_ok = self.score_threshold > 0.0 && self.score_threshold < 1.0;
        if !score_ok {
            return Err(Error::Config(format!(
                "score threshold must be in (0, 1), got {}",
                self.score_threshold
            )));
        }
        let gaze_ok = self.gaze_threshold_m > 0.0;
        if !gaze_ok {
            return Err(Error::Config(format!(
                "gaze threshold must be > 0, got {}",
                self.gaze_threshold_m
            )));
        }
        Ok(())
    }
}

/// The model roster evaluated in the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    Lstm,
    LstmSelect,
    LstmBuff,
    Enhanced,
    NoGaze,
}

impl VariantName {
    pub fn as_str(self) -> &'static str {
        match self {
            VariantName::Lstm => "lstm",
            VariantName::LstmSelect => "lstm_select",
            VariantName::LstmBuff => "lstm_buff",
            VariantName::Enhanced => "enhanced",
            VariantName::NoGaze => "no_gaze",
        }
    }
}

impl fmt::Display for VariantName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for VariantName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lstm" => Ok(VariantName::Lstm),
            "lstm_select" => Ok(VariantName::LstmSelect),
            "lstm_buff" => Ok(VariantName::LstmBuff),
            "enhanced" => Ok(VariantName::Enhanced),
            "no_gaze" | "nogaze" => Ok(VariantName::NoGaze),
            other => Err(Error::Config(format!("unknown variant `{other}`"))),
        }
    }
}

/// Channels, buffer and hidden size defining one model variant.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantSpec {
    pub name: VariantName,
    pub channels: Vec<FeatureChannel>,
    pub buffer_len: Option<usize>,
    pub hidden_units: usize,
    pub enhanced: Option<EnhancedConfig>,
}

pub const DEFAULT_BUFFER_LEN: usize = 20;

impl VariantSpec {
    /// Whole history, all sixteen channels, 20 hidden units.
    pub fn lstm() -> VariantSpec {
        VariantSpec {
            name: VariantName::Lstm,
            channels: FeatureConfig::full().channels,
            buffer_len: None,
            hidden_units: crate::lstm::DEFAULT_HIDDEN_UNITS,
            enhanced: None,
        }
    }

    /// Whole history on the reduced cue set.
    pub fn lstm_select() -> VariantSpec {
        VariantSpec {
            name: VariantName::LstmSelect,
            channels: FeatureConfig::reduced().channels,
            buffer_len: None,
            hidden_units: crate::lstm::DEFAULT_HIDDEN_UNITS,
            enhanced: None,
        }
    }

    /// Reduced cue set, last-20-frames buffer.
    pub fn lstm_buff() -> VariantSpec {
        VariantSpec {
            name: VariantName::LstmBuff,
            channels: FeatureConfig::reduced().channels,
            buffer_len: Some(DEFAULT_BUFFER_LEN),
            hidden_units: crate::lstm::DEFAULT_HIDDEN_UNITS,
            enhanced: None,
        }
    }

    /// The buffered model plus the gaze-enhanced decision rule. Thresholds
    /// default to the known-good pair until grid search overwrites them.
    pub fn enhanced() -> VariantSpec {
        VariantSpec {
            name: VariantName::Enhanced,
            enhanced: Some(EnhancedConfig::default()),
            ..VariantSpec::lstm_buff()
        }
    }

    /// Hand and head cues only, 40 hidden units, buffered.
    pub fn no_gaze() -> VariantSpec {
        VariantSpec {
            name: VariantName::NoGaze,
            channels: FeatureConfig::no_gaze().channels,
            buffer_len: Some(DEFAULT_BUFFER_LEN),
            hidden_units: crate::lstm::NO_GAZE_HIDDEN_UNITS,
            enhanced: None,
        }
    }

    pub fn of(name: VariantName) -> VariantSpec {
        match name {
            VariantName::Lstm => VariantSpec::lstm(),
            VariantName::LstmSelect => VariantSpec::lstm_select(),
            VariantName::LstmBuff => VariantSpec::lstm_buff(),
            VariantName::Enhanced => VariantSpec::enhanced(),
            VariantName::NoGaze => VariantSpec::no_gaze(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.enhanced.is_some() && self.name != VariantName::Enhanced {
            return Err(Error::Config(format!(
                "enhanced thresholds are only valid on the enhanced variant, not `{}`",
                self.name
            )));
        }
        if self.name == VariantName::NoGaze
            && self
                .channels
                .iter()
                .any(|c| matches!(c, FeatureChannel::Gaze | FeatureChannel::CumulativeGaze))
        {
            return Err(Error::Config(
                "the no_gaze variant must exclude gaze channels".into(),
            ));
        }
        if let Some(e) = &self.enhanced {
            e.validate()?;
        }
        if self.hidden_units == 0 {
            return Err(Error::Config("hidden_units must be >= 1".into()));
        }
        if self.buffer_len == Some(0) {
            return Err(Error::Config("buffer_len must be >= 1".into()));
        }
        Ok(())
    }

    pub fn decision_rule(&self) -> DecisionRule {
        match self.enhanced {
            Some(cfg) => DecisionRule::Enhanced(cfg),
            None => DecisionRule::Argmax,
        }
    }
}

// ---------------------------------------------------------------------------
// Classifier bundle
// ---------------------------------------------------------------------------

/// A trained classifier with everything inference needs: weights, channel
/// configuration and the training-set normalizer.
#[derive(Debug, Clone, PartialEq)]
pub struct GoalClassifier {
    pub network: NetworkConfig,
    pub params: LstmParams,
    pub features: FeatureConfig,
    pub norm: NormStats,
}

impl GoalClassifier {
    pub fn from_model_file(m: &ModelFile) -> GoalClassifier {
        GoalClassifier {
            network: m.network,
            params: m.params.clone(),
            features: m.features.clone(),
            norm: m.norm.clone(),
        }
    }

    /// Errors when a variant's channel list does not match the channels this
    /// classifier was trained on.
    pub fn check_variant(&self, variant: &VariantSpec) -> Result<()> {
        if variant.channels != self.features.channels {
            return Err(Error::Config(format!(
                "variant `{}` expects channels {:?} but the model was trained on {:?}",
                variant.name,
                variant
                    .channels
                    .iter()
                    .map(|c| c.name())
                    .collect::<Vec<_>>(),
                self.features
                    .channels
                    .iter()
                    .map(|c| c.name())
                    .collect::<Vec<_>>()
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Scoring and decisions
// ---------------------------------------------------------------------------

/// Scores every goal on the segment prefix `frames[..prefix_len]` with the
/// shared classifier. Buffered mode uses only the last `min(prefix_len, L)`
/// frames. Returns one score per goal, in goal-set order.
pub fn predict_scores(
    seg: &Segment,
    prefix_len: usize,
    goals: &GoalSet,
    clf: &GoalClassifier,
    buffer_len: Option<usize>,
) -> Result<Vec<f64>> {
    if prefix_len == 0 || prefix_len > seg.len() {
        return Err(Error::Config(format!(
            "prefix length {prefix_len} invalid for a segment of {} frames",
            seg.len()
        )));
    }
    let start = match buffer_len {
        Some(l) => prefix_len.saturating_sub(l),
        None => 0,
    };
    let window = &seg.frames[start..prefix_len];
    let mut scores = Vec::with_capacity(goals.len());
    for goal in goals.goals() {
        let raw = extract_frame_features(window, goal, &clf.features)?;
        let x = apply_normalizer(&raw, &clf.norm)?;
        let (score, _) = forward(&clf.params, &x)?;
        scores.push(score);
    }
    Ok(scores)
}

/// Index of the maximum score; ties break to the lowest ordinal.
pub fn decide_argmax(scores: &[f64]) -> usize {
    assert!(!scores.is_empty(), "decide_argmax needs at least one score");
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

/// The gaze-enhanced rule: trust the classifier above `score_threshold`;
/// otherwise pick a directly fixated object (gaze-ray distance below
/// `gaze_threshold_m`) if there is one; otherwise fall back to the highest
/// classifier score.
pub fn decide_enhanced(scores: &[f64], gaze_dists_m: &[f64], cfg: &EnhancedConfig) -> usize {
    assert_eq!(
        scores.len(),
        gaze_dists_m.len(),
        "score/gaze length mismatch"
    );
    let best_score = decide_argmax(scores);
    if scores[best_score] > cfg.score_threshold {
        return best_score;
    }
    let mut best_gaze = 0;
    for (i, d) in gaze_dists_m.iter().enumerate().skip(1) {
        if *d < gaze_dists_m[best_gaze] {
            best_gaze = i;
        }
    }
    if gaze_dists_m[best_gaze] < cfg.gaze_threshold_m {
        best_gaze
    } else {
        best_score
    }
}

/// Which rule converts per-goal scores into a pick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecisionRule {
    Argmax,
    Enhanced(EnhancedConfig),
}

/// Un-normalized gaze-ray distances (meters) from one frame to every goal,
/// as consumed by the enhanced rule.
pub fn goal_gaze_distances(frame: &Frame, goals: &GoalSet) -> Vec<f64> {
    goals
        .goals()
        .iter()
        .map(|g| gaze_ray_distance(frame.gaze_origin, frame.gaze_dir, g.position))
        .collect()
}

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

/// Scores and gaze distances observed at one stride step.
#[derive(Debug, Clone)]
pub struct StepObservation {
    pub frame_index: usize,
    pub scores: Vec<f64>,
    pub gaze_dists_m: Vec<f64>,
}

/// Runs the classifier at every stride point of a segment and records the
/// raw observations (decision-rule independent).
pub fn segment_observations(
    seg: &Segment,
    goals: &GoalSet,
    clf: &GoalClassifier,
    buffer_len: Option<usize>,
    eval: &EvalConfig,
) -> Result<Vec<StepObservation>> {
    let points = stride_points(seg.len(), eval.stride_frames);
    match buffer_len {
        Some(_) => points
            .into_iter()
            .map(|k| {
                let scores = predict_scores(seg, k + 1, goals, clf, buffer_len)?;
                Ok(StepObservation {
                    frame_index: k,
                    scores,
                    gaze_dists_m: goal_gaze_distances(&seg.frames[k], goals),
                })
            })
            .collect(),
        None => {
            // Whole-history inference reuses the recurrence: one O(T) pass
            // per goal gives the score at every prefix end.
            let mut per_goal: Vec<Vec<f64>> = Vec::with_capacity(goals.len());
            for goal in goals.goals() {
                let raw = extract_frame_features(&seg.frames, goal, &clf.features)?;
                let x = apply_normalizer(&raw, &clf.norm)?;
                per_goal.push(prefix_scores(&clf.params, &x)?);
            }
            Ok(points
                .into_iter()
                .map(|k| StepObservation {
                    frame_index: k,
                    scores: per_goal.iter().map(|s| s[k]).collect(),
                    gaze_dists_m: goal_gaze_distances(&seg.frames[k], goals),
                })
                .collect())
        }
    }
}

/// Full prediction trace for one segment under the given decision rule.
pub fn trace_segment(
    seg: &Segment,
    goals: &GoalSet,
    clf: &GoalClassifier,
    buffer_len: Option<usize>,
    rule: DecisionRule,
    eval: &EvalConfig,
) -> Result<PredictionTrace> {
    let obs = segment_observations(seg, goals, clf, buffer_len, eval)?;
    Ok(trace_from_observations(seg, goals, &obs, rule))
}

fn trace_from_observations(
    seg: &Segment,
    goals: &GoalSet,
    obs: &[StepObservation],
    rule: DecisionRule,
) -> PredictionTrace {
    let steps = obs
        .iter()
        .map(|o| {
            let ordinal = match rule {
                DecisionRule::Argmax => decide_argmax(&o.scores),
                DecisionRule::Enhanced(cfg) => decide_enhanced(&o.scores, &o.gaze_dists_m, &cfg),
            };
            TraceStep {
                frame_index: o.frame_index,
                scores: o.scores.clone(),
                chosen: goals.get(ordinal).id.clone(),
            }
        })
        .collect();
    PredictionTrace {
        n_frames: seg.len(),
        truth: seg.picked_goal.clone(),
        steps,
    }
}

// ---------------------------------------------------------------------------
// Threshold grid search
// ---------------------------------------------------------------------------

/// Score-threshold grid used when none is given: 0.40 to 0.70 in steps of 0.03.
pub fn default_score_grid() -> Vec<f64> {
    (0..11).map(|i| 0.40 + 0.03 * i as f64).collect()
}

/// Gaze-threshold grid used when none is given: 0.05 m to 0.50 m in steps of 0.05.
pub fn default_gaze_grid() -> Vec<f64> {
    (1..11).map(|i| 0.05 * i as f64).collect()
}

/// Exhaustively evaluates every (score, gaze) threshold pair on the training
/// set and returns the pair with the highest AUC (ties: first in row-major
/// order, score thresholds outer). The classifier is scored once; the grid
/// only re-runs the decision rule.
pub fn grid_search_thresholds(
    train: &Dataset,
    clf: &GoalClassifier,
    buffer_len: Option<usize>,
    score_grid: &[f64],
    gaze_grid: &[f64],
    eval: &EvalConfig,
) -> Result<(EnhancedConfig, f64)> {
    if score_grid.is_empty() || gaze_grid.is_empty() {
        return Err(Error::Config("grid search needs non-empty grids".into()));
    }
    if train.segments.is_empty() {
        return Err(Error::Invalid(
            "grid search needs a non-empty training set".into(),
        ));
    }
    let mut all_obs = Vec::with_capacity(train.segments.len());
    for seg in &train.segments {
        all_obs.push(segment_observations(
            seg,
            &train.goal_set,
            clf,
            buffer_len,
            eval,
        )?);
    }

    let mut best: Option<(EnhancedConfig, f64)> = None;
    for &s_thr in score_grid {
        for &g_thr in gaze_grid {
            let cfg = EnhancedConfig {
                score_threshold: s_thr,
                gaze_threshold_m: g_thr,
            };
            let traces: Vec<PredictionTrace> = train
                .segments
                .iter()
                .zip(all_obs.iter())
                .map(|(seg, obs)| {
                    trace_from_observations(seg, &train.goal_set, obs, DecisionRule::Enhanced(cfg))
                })
                .collect();
            let curve = crate::metrics::accuracy_curve(&traces, eval)?;
            let score = crate::metrics::auc(&curve);
            if best.as_ref().is_none_or(|(_, b)| score > *b) {
                best = Some((cfg, score));
            }
        }
    }
    Ok(best.expect("grids are non-empty"))
}

// ---------------------------------------------------------------------------
// Macro locations
// ---------------------------------------------------------------------------

/// The macro location of a goal ordinal.
pub fn macro_of(ordinal: usize, goals: &GoalSet) -> &str {
    &goals.get(ordinal).macro_id
}

/// Coarsens a trace to macro level: both prediction and truth are replaced
/// by their goal's macro id, so "right shelf, wrong object" counts correct.
pub fn to_macro_trace(trace: &PredictionTrace, goals: &GoalSet) -> PredictionTrace {
    let map = |id: &str| -> String {
        goals
            .index_of(id)
            .map(|i| goals.get(i).macro_id.clone())
            .unwrap_or_else(|| id.to_string())
    };
    PredictionTrace {
        n_frames: trace.n_frames,
        truth: map(&trace.truth),
        steps: trace
            .steps
            .iter()
            .map(|s| TraceStep {
                frame_index: s.frame_index,
                scores: s.scores.clone(),
                chosen: map(&s.chosen),
            })
            .collect(),
    }
}
