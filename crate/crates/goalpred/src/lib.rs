//! Goal prediction from human motion and gaze.
//!
//! Given a streaming sequence of joint poses, orientations and gaze, this
//! crate predicts which of N labeled objects the human will pick next. One
//! shared LSTM binary classifier is evaluated against every goal's feature
//! sequence ("an ensemble of identical networks"); the highest score wins,
//! optionally refined by a gaze-fixation decision rule. Single-cue baselines,
//! a feature-correlation toolkit, an accuracy-AUC evaluation harness and a
//! deterministic synthetic scenario generator round out the pipeline, so the
//! whole study runs at desk scale without any external recordings.
//!
//! # Quick start
//!
//! ```
//! use goalpred::prelude::*;
//!
//! // A small synthetic scene: 4 goals on 3 clusters, seeded.
//! let gen = GenConfig { segments: 10, n_goals: 4, seed: 42, ..GenConfig::default() };
//! let dataset = generate(&gen)?;
//!
//! // Single-cue gaze baseline over the final 3-second window.
//! let cfg = RunConfig::default();
//! let report = run_baselines(&dataset, &[FeatureChannel::Gaze], &cfg)?;
//! let gaze_auc = report.methods["gaze"].auc;
//! assert!(gaze_auc > 0.0 && gaze_auc <= 360.0);
//! # Ok::<(), goalpred::Error>(())
//! ```
//!
//! The `examples/` directory has one runnable example per capability:
//! dataset generation, feature inspection, correlation analysis, cue
//! baselines, training, variant evaluation, the enhanced decision rule and
//! macro-location prediction. The `goalpred` binary exposes the same
//! pipeline as subcommands (`generate`, `train`, `predict`, `baselines`,
//! `correlate`, `eval`).

pub mod cli;
pub mod datamodel;
pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod features;
pub mod lstm;
pub mod metrics;
pub mod selection;
pub mod synthgen;

pub use error::{Error, Result};

/// The commonly used types and functions in one import.
pub mod prelude {
    pub use crate::datamodel::{
        load_dataset, split_by_subject, subject_set, Dataset, Frame, Goal, GoalSet, JointId,
        JointPose, Joints, Segment, Vec3,
    };
    pub use crate::ensemble::{
        decide_argmax, decide_enhanced, grid_search_thresholds, macro_of, predict_scores,
        to_macro_trace, trace_segment, DecisionRule, EnhancedConfig, GoalClassifier, VariantName,
        VariantSpec,
    };
    pub use crate::error::{Error, Result};
    pub use crate::experiments::{
        run_baselines, run_macro, run_no_gaze, run_variants, train_variant, ExperimentReport,
        RunConfig,
    };
    pub use crate::features::{
        apply_normalizer, cumulative_gaze, direction_distance, euclidean_distance,
        extract_features, fit_normalizer, gaze_ray_distance, FeatureChannel, FeatureConfig,
        FeatureMatrix, GazeMetric, NormStats,
    };
    pub use crate::lstm::{
        backward, forward, load_model, save_model, train, LstmParams, ModelFile, NetworkConfig,
        SequenceMode, TrainConfig,
    };
    pub use crate::metrics::{accuracy_curve, auc, EvalConfig, PredictionTrace, TraceStep};
    pub use crate::selection::{baseline_predict, correlation_matrix, pearson, CorrelationMatrix};
    pub use crate::synthgen::{generate, GenConfig};
}
