//! Scripted experiment runners: single-cue baseline AUCs, model-variant
//! AUCs, macro-location evaluation and the no-gaze comparison. Reports carry
//! a config fingerprint so identical runs are verifiably identical.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::datamodel::Dataset;
use crate::ensemble::{
    grid_search_thresholds, to_macro_trace, trace_segment, GoalClassifier, VariantName, VariantSpec,
};
use crate::error::{Error, Result};
use crate::features::{FeatureChannel, FeatureConfig, GazeMetric, DEFAULT_GAZE_FIX_THRESHOLD_M};
use crate::lstm::{train, NetworkConfig, SequenceMode, TrainConfig};
use crate::metrics::{accuracy_curve, auc, stride_points, EvalConfig, PredictionTrace, TraceStep};
use crate::selection::baseline_values;

/// Shared knobs for a whole experiment run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub eval: EvalConfig,
    pub gaze_fix_threshold_m: f64,
    pub gaze_metric: GazeMetric,
    pub score_grid: Vec<f64>,
    pub gaze_grid: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            train: TrainConfig::default(),
            eval: EvalConfig::default(),
            gaze_fix_threshold_m: DEFAULT_GAZE_FIX_THRESHOLD_M,
            gaze_metric: GazeMetric::RayDistance,
            score_grid: crate::ensemble::default_score_grid(),
            gaze_grid: crate::ensemble::default_gaze_grid(),
        }
    }
}

impl RunConfig {
    pub fn feature_config(&self, channels: Vec<FeatureChannel>) -> Result<FeatureConfig> {
        let cfg = FeatureConfig {
            channels,
            gaze_fix_threshold_m: self.gaze_fix_threshold_m,
            gaze_metric: self.gaze_metric,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// AUC plus the underlying accuracy curve for one method.
#[derive(Debug, Clone, Serialize)]
pub struct MethodResult {
    pub auc: f64,
    pub curve: Vec<f64>,
}

/// Identifies the exact inputs of a run.
#[derive(Debug, Clone, Serialize)]
pub struct Fingerprint {
    pub seed: u64,
    pub dataset_hash: String,
    pub train_dataset_hash: Option<String>,
    pub methods: Vec<String>,
}

/// Results of one experiment suite, keyed by method name.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub methods: BTreeMap<String, MethodResult>,
    pub fingerprint: Fingerprint,
}

impl ExperimentReport {
    fn new(seed: u64, test: &Dataset, train: Option<&Dataset>) -> ExperimentReport {
        ExperimentReport {
            methods: BTreeMap::new(),
            fingerprint: Fingerprint {
                seed,
                dataset_hash: dataset_fingerprint(test),
                train_dataset_hash: train.map(dataset_fingerprint),
                methods: Vec::new(),
            },
        }
    }

    fn push(&mut self, name: &str, curve: Vec<f64>) {
        self.fingerprint.methods.push(name.to_string());
        self.methods.insert(
            name.to_string(),
            MethodResult {
                auc: auc(&curve),
                curve,
            },
        );
    }
}

/// FNV-1a hash of the canonical serialization, as a hex string.
pub fn dataset_fingerprint(d: &Dataset) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for byte in d.to_jsonl().as_bytes() {
        h ^= *byte as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

/// AUC values reported on the full MoGaze capture, shipped for side-by-side
/// display next to local runs. These describe a different dataset and are
/// never used as test oracles for synthetic runs.
pub fn mogaze_reference_aucs() -> &'static [(&'static str, f64)] {
    &[
        ("hand_euc", 83.63),
        ("head_ori", 71.39),
        ("hand_ori", 83.47),
        ("cumulative_gaze", 103.37),
        ("gaze", 155.02),
        ("lstm", 134.24),
        ("lstm_select", 134.43),
        ("lstm_buff", 151.98),
        ("enhanced", 159.01),
        ("no_gaze", 118.60),
        ("lstm_buff_macro", 266.31),
        ("gaze_macro", 251.31),
    ]
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

/// Prediction traces of a single-cue baseline over a whole dataset. The
/// per-goal cue values are recorded as the step scores.
pub fn baseline_traces(
    test: &Dataset,
    channel: FeatureChannel,
    cfg: &RunConfig,
) -> Result<Vec<PredictionTrace>> {
    let fc = cfg.feature_config(vec![channel])?;
    let mut traces = Vec::with_capacity(test.segments.len());
    for seg in &test.segments {
        let steps = stride_points(seg.len(), cfg.eval.stride_frames)
            .into_iter()
            .map(|k| {
                let values = baseline_values(&seg.frames[..=k], &test.goal_set, channel, &fc);
                let pick = crate::selection::baseline_predict(
                    &seg.frames[..=k],
                    &test.goal_set,
                    channel,
                    &fc,
                );
                TraceStep {
                    frame_index: k,
                    scores: values,
                    chosen: test.goal_set.get(pick).id.clone(),
                }
            })
            .collect();
        traces.push(PredictionTrace {
            n_frames: seg.len(),
            truth: seg.picked_goal.clone(),
            steps,
        });
    }
    Ok(traces)
}

/// One AUC per requested channel baseline over the evaluation window.
pub fn run_baselines(
    test: &Dataset,
    channels: &[FeatureChannel],
    cfg: &RunConfig,
) -> Result<ExperimentReport> {
    if test.segments.is_empty() {
        return Err(Error::Invalid(
            "baseline evaluation needs a non-empty test set".into(),
        ));
    }
    let mut report = ExperimentReport::new(cfg.train.seed, test, None);
    for &ch in channels {
        let traces = baseline_traces(test, ch, cfg)?;
        report.push(ch.name(), accuracy_curve(&traces, &cfg.eval)?);
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Variants
// ---------------------------------------------------------------------------

/// A trained variant ready for evaluation.
pub struct TrainedVariant {
    pub spec: VariantSpec,
    pub classifier: GoalClassifier,
}

/// Trains one variant on the training split. The enhanced variant runs the
/// threshold grid search on the training set and stores the winning pair in
/// its spec.
pub fn train_variant(
    train_set: &Dataset,
    spec: &VariantSpec,
    cfg: &RunConfig,
) -> Result<TrainedVariant> {
    spec.validate()?;
    let features = cfg.feature_config(spec.channels.clone())?;
    let network = NetworkConfig::new(features.channels.len(), spec.hidden_units)?;
    let mode = match spec.buffer_len {
        Some(len) => SequenceMode::Buffered { len },
        None => SequenceMode::FullHistory,
    };
    log::info!(
        "training variant `{}` ({} channels, H={})",
        spec.name,
        spec.channels.len(),
        spec.hidden_units
    );
    let outcome = train(train_set, &features, &network, &cfg.train, mode)?;
    let classifier = GoalClassifier {
        network,
        params: outcome.params,
        features,
        norm: outcome.norm,
    };
    let mut spec = spec.clone();
    if spec.name == VariantName::Enhanced {
        let (best, train_auc) = grid_search_thresholds(
            train_set,
            &classifier,
            spec.buffer_len,
            &cfg.score_grid,
            &cfg.gaze_grid,
            &cfg.eval,
        )?;
        log::info!(
            "grid search: score_threshold {:.2}, gaze_threshold {:.2} m (train AUC {train_auc:.2})",
            best.score_threshold,
            best.gaze_threshold_m
        );
        spec.enhanced = Some(best);
    }
    Ok(TrainedVariant { spec, classifier })
}

/// Traces of a trained variant over a dataset.
pub fn variant_traces(
    test: &Dataset,
    tv: &TrainedVariant,
    cfg: &RunConfig,
) -> Result<Vec<PredictionTrace>> {
    tv.classifier.check_variant(&tv.spec)?;
    let rule = tv.spec.decision_rule();
    test.segments
        .iter()
        .map(|seg| {
            trace_segment(
                seg,
                &test.goal_set,
                &tv.classifier,
                tv.spec.buffer_len,
                rule,
                &cfg.eval,
            )
        })
        .collect()
}

/// Trains every variant in the roster and evaluates object-level AUC on the
/// test split; the gaze baseline is included for side-by-side comparison.
pub fn run_variants(
    train_set: &Dataset,
    test: &Dataset,
    roster: &[VariantSpec],
    cfg: &RunConfig,
) -> Result<ExperimentReport> {
    check_disjoint_subjects(train_set, test)?;
    let mut report = ExperimentReport::new(cfg.train.seed, test, Some(train_set));
    let gaze_traces = baseline_traces(test, FeatureChannel::Gaze, cfg)?;
    report.push("gaze", accuracy_curve(&gaze_traces, &cfg.eval)?);
    for spec in roster {
        let tv = train_variant(train_set, spec, cfg)?;
        let traces = variant_traces(test, &tv, cfg)?;
        report.push(tv.spec.name.as_str(), accuracy_curve(&traces, &cfg.eval)?);
    }
    Ok(report)
}

/// Macro-location coarsening of already computed traces: each method gains a
/// `<name>_macro` entry alongside its object-level result.
pub fn run_macro(
    test: &Dataset,
    traces_by_method: &BTreeMap<String, Vec<PredictionTrace>>,
    cfg: &RunConfig,
) -> Result<ExperimentReport> {
    if traces_by_method.is_empty() {
        return Err(Error::Invalid(
            "macro evaluation needs at least one trace set".into(),
        ));
    }
    let mut report = ExperimentReport::new(cfg.train.seed, test, None);
    for (name, traces) in traces_by_method {
        report.push(name, accuracy_curve(traces, &cfg.eval)?);
        let macro_traces: Vec<PredictionTrace> = traces
            .iter()
            .map(|t| to_macro_trace(t, &test.goal_set))
            .collect();
        report.push(
            &format!("{name}_macro"),
            accuracy_curve(&macro_traces, &cfg.eval)?,
        );
    }
    Ok(report)
}

/// The no-gaze study: the hand+head variant with 40 hidden units against the
/// strongest body-cue baselines.
pub fn run_no_gaze(
    train_set: &Dataset,
    test: &Dataset,
    cfg: &RunConfig,
) -> Result<ExperimentReport> {
    check_disjoint_subjects(train_set, test)?;
    let mut report = ExperimentReport::new(cfg.train.seed, test, Some(train_set));
    for ch in [FeatureChannel::HandEuc, FeatureChannel::HeadOri] {
        let traces = baseline_traces(test, ch, cfg)?;
        report.push(ch.name(), accuracy_curve(&traces, &cfg.eval)?);
    }
    let tv = train_variant(train_set, &VariantSpec::no_gaze(), cfg)?;
    let traces = variant_traces(test, &tv, cfg)?;
    report.push(
        VariantName::NoGaze.as_str(),
        accuracy_curve(&traces, &cfg.eval)?,
    );
    Ok(report)
}

fn check_disjoint_subjects(train_set: &Dataset, test: &Dataset) -> Result<()> {
    let train_subjects = train_set.subjects();
    let overlap: Vec<String> = test
        .subjects()
        .into_iter()
        .filter(|s| train_subjects.contains(s))
        .collect();
    if !overlap.is_empty() {
        return Err(Error::Config(format!(
            "train and test splits share subjects: {overlap:?}"
        )));
    }
    Ok(())
}
