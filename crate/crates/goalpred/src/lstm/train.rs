//! Training-example construction and the minibatch training loop.
//!
//! Every (segment, goal) pair yields training sequences labeled 1 when the
//! goal is the picked one and 0 otherwise. Full-history mode uses the whole
//! segment as a single sequence; buffered mode samples fixed-length windows
//! whose positions are spread over the segment so the training distribution
//! matches what buffered inference sees.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{backward, cross_entropy, forward, AdamState, LstmParams, NetworkConfig};
use crate::datamodel::Dataset;
use crate::error::{Error, Result};
use crate::features::{
    apply_normalizer, extract_frame_features, fit_normalizer, FeatureConfig, NormStats,
};

/// How class imbalance (1 positive vs N-1 negatives per segment) is handled:
/// `All` keeps every negative; `Balanced` subsamples negatives per epoch to
/// match the positive count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NegativeSampling {
    #[default]
    All,
    Balanced,
}

impl fmt::Display for NegativeSampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            NegativeSampling::All => "all",
            NegativeSampling::Balanced => "balanced",
        })
    }
}

impl FromStr for NegativeSampling {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(NegativeSampling::All),
            "balanced" => Ok(NegativeSampling::Balanced),
            other => Err(Error::Config(format!(
                "unknown negative sampling mode `{other}`"
            ))),
        }
    }
}

/// Optimizer and loop hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub negative_sampling: NegativeSampling,
    /// Buffered mode: how many windows to sample per (segment, goal) pair.
    pub windows_per_segment: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 5,
            batch_size: 5,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 7,
            negative_sampling: NegativeSampling::All,
            windows_per_segment: 4,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        let rate_ok = self.learning_rate > 0.0;
        if !rate_ok {
            return Err(Error::Config(format!(
                "learning rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if self.windows_per_segment == 0 {
            return Err(Error::Config("windows_per_segment must be >= 1".into()));
        }
        Ok(())
    }
}

/// Sequence construction for training and inference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceMode {
    /// The whole segment is one training sequence; inference scores prefixes.
    FullHistory,
    /// Only the last `len` frames are sent to the network.
    Buffered { len: usize },
}

/// One training sequence: frames `[start, end)` of a segment scored against
/// one goal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainExample {
    pub segment: usize,
    pub goal: usize,
    pub start: usize,
    pub end: usize,
    pub label: bool,
}

/// Deterministic example list for a dataset. Buffered mode samples
/// `windows_per_segment` window ends evenly spread over each segment
/// (always including the final frame).
pub fn training_examples(
    d: &Dataset,
    mode: SequenceMode,
    windows_per_segment: usize,
) -> Vec<TrainExample> {
    let mut out = Vec::new();
    for (si, seg) in d.segments.iter().enumerate() {
        let t_total = seg.len();
        let spans: Vec<(usize, usize)> = match mode {
            SequenceMode::FullHistory => vec![(0, t_total)],
            SequenceMode::Buffered { len } => {
                let first_end = len.min(t_total) - 1;
                let last_end = t_total - 1;
                let n = windows_per_segment.min(last_end - first_end + 1).max(1);
                let mut ends: Vec<usize> = (0..n)
                    .map(|k| {
                        if n == 1 {
                            last_end
                        } else {
                            first_end
                                + ((last_end - first_end) as f64 * k as f64 / (n - 1) as f64)
                                    .round() as usize
                        }
                    })
                    .collect();
                ends.dedup();
                ends.into_iter()
                    .map(|e| (e + 1 - len.min(e + 1), e + 1))
                    .collect()
            }
        };
        for (gi, goal) in d.goal_set.goals().iter().enumerate() {
            let label = goal.id == seg.picked_goal;
            for &(start, end) in &spans {
                out.push(TrainExample {
                    segment: si,
                    goal: gi,
                    start,
                    end,
                    label,
                });
            }
        }
    }
    out
}

/// Everything [`train`] produces: final weights, the fitted normalizer and
/// the mean cross-entropy per epoch.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: LstmParams,
    pub norm: NormStats,
    pub epoch_mean_loss: Vec<f64>,
}

/// Trains the shared binary classifier with minibatch Adam. Fully
/// deterministic given `cfg.seed`.
pub fn train(
    train_set: &Dataset,
    features: &FeatureConfig,
    network: &NetworkConfig,
    cfg: &TrainConfig,
    mode: SequenceMode,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    features.validate()?;
    if network.input_size != features.channels.len() {
        return Err(Error::Config(format!(
            "network input_size {} != {} configured channels",
            network.input_size,
            features.channels.len()
        )));
    }
    if train_set.segments.is_empty() {
        return Err(Error::Invalid("training set has no segments".into()));
    }
    if let SequenceMode::Buffered { len } = mode {
        if len == 0 {
            return Err(Error::Config("buffer length must be >= 1".into()));
        }
    }

    let norm = fit_normalizer(train_set, features)?;
    let examples = training_examples(train_set, mode, cfg.windows_per_segment);
    let positives: Vec<usize> = (0..examples.len()).filter(|&i| examples[i].label).collect();
    let negatives: Vec<usize> = (0..examples.len())
        .filter(|&i| !examples[i].label)
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = LstmParams::init(network, &mut rng);
    let mut adam = AdamState::new(&params);
    let mut epoch_mean_loss = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let mut order: Vec<usize> = match cfg.negative_sampling {
            NegativeSampling::All => (0..examples.len()).collect(),
            NegativeSampling::Balanced => {
                let mut negs = negatives.clone();
                negs.shuffle(&mut rng);
                negs.truncate(positives.len());
                let mut o = positives.clone();
                o.extend(negs);
                o
            }
        };
        order.shuffle(&mut rng);

        let mut loss_sum = 0.0;
        let mut grads = LstmParams::zeros(network);
        for batch in order.chunks(cfg.batch_size) {
            grads.scale(0.0);
            for &ei in batch {
                let ex = &examples[ei];
                let seg = &train_set.segments[ex.segment];
                let goal = train_set.goal_set.get(ex.goal);
                let raw = extract_frame_features(&seg.frames[ex.start..ex.end], goal, features)?;
                let x = apply_normalizer(&raw, &norm)?;
                let (_, cache) = forward(&params, &x)?;
                loss_sum += cross_entropy(&cache, ex.label);
                let g = backward(&params, &cache, ex.label)?;
                grads.add_scaled(&g, 1.0);
            }
            grads.scale(1.0 / batch.len() as f64);
            adam.apply(&mut params, &grads, cfg);
        }

        let mean = loss_sum / order.len() as f64;
        if !mean.is_finite() {
            return Err(Error::Numeric(format!(
                "epoch {epoch}: mean loss is not finite ({mean}); \
                 {} examples, lr {}, seed {}",
                order.len(),
                cfg.learning_rate,
                cfg.seed
            )));
        }
        log::debug!(
            "epoch {epoch}: mean loss {mean:.6} over {} examples",
            order.len()
        );
        epoch_mean_loss.push(mean);
    }

    Ok(TrainOutcome {
        params,
        norm,
        epoch_mean_loss,
    })
}

/// Fraction of training examples classified correctly (score > 0.5 for
/// positives, < 0.5 for negatives). Diagnostic used in tests and reports.
pub fn classification_accuracy(
    d: &Dataset,
    features: &FeatureConfig,
    norm: &NormStats,
    params: &LstmParams,
    mode: SequenceMode,
    windows_per_segment: usize,
) -> Result<f64> {
    let examples = training_examples(d, mode, windows_per_segment);
    if examples.is_empty() {
        return Err(Error::Invalid("no examples to score".into()));
    }
    let mut hits = 0usize;
    for ex in &examples {
        let seg = &d.segments[ex.segment];
        let goal = d.goal_set.get(ex.goal);
        let raw = extract_frame_features(&seg.frames[ex.start..ex.end], goal, features)?;
        let x = apply_normalizer(&raw, norm)?;
        let (score, _) = forward(params, &x)?;
        if (score > 0.5) == ex.label {
            hits += 1;
        }
    }
    Ok(hits as f64 / examples.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::{Dataset, Frame, Goal, GoalSet, JointPose, Joints, Segment, Vec3};
    use crate::features::FeatureChannel;

    /// Synthetic separable set: the right hand sits exactly at the picked
    /// goal, so hand_euc is 0 for the true goal and ~1 for the others.
    pub(crate) fn separable_dataset(n_segments: usize) -> Dataset {
        let goals = GoalSet::new(vec![
            Goal {
                id: "a".into(),
                position: Vec3::new(1.0, 0.0, 1.0),
                macro_id: "m".into(),
            },
            Goal {
                id: "b".into(),
                position: Vec3::new(-0.5, 0.9, 1.0),
                macro_id: "m".into(),
            },
            Goal {
                id: "c".into(),
                position: Vec3::new(-0.5, -0.9, 1.0),
                macro_id: "m".into(),
            },
        ])
        .unwrap();
        let ids = ["a", "b", "c"];
        let segments: Vec<Segment> = (0..n_segments)
            .map(|i| {
                let picked = ids[i % 3];
                let hand = goals.get(i % 3).position + Vec3::new(0.0, 0.0, 0.001);
                let fwd = Vec3::new(0.0, 0.0, 1.0);
                let pose = |p: Vec3| JointPose {
                    position: p,
                    forward: fwd,
                };
                let frames: Vec<Frame> = (0..5)
                    .map(|k| Frame {
                        t: k as f64 / 120.0,
                        gaze_origin: Vec3::new(0.0, 0.0, 1.6),
                        gaze_dir: fwd,
                        joints: Joints {
                            head: pose(Vec3::new(0.0, 0.0, 1.6)),
                            torso: pose(Vec3::new(0.0, 0.0, 1.2)),
                            pelvis: pose(Vec3::new(0.0, 0.0, 1.0)),
                            left_hand: pose(Vec3::new(0.0, 0.3, 1.0)),
                            right_hand: pose(hand),
                            left_shoulder: pose(Vec3::new(0.0, 0.2, 1.4)),
                            right_shoulder: pose(Vec3::new(0.0, -0.2, 1.4)),
                        },
                    })
                    .collect();
                Segment {
                    frames,
                    frame_rate_hz: 120.0,
                    picked_goal: picked.into(),
                    subject_id: format!("s{}", i % 2),
                }
            })
            .collect();
        Dataset::new(goals, segments).unwrap()
    }

    fn feature_cfg() -> FeatureConfig {
        FeatureConfig::new(vec![FeatureChannel::HandEuc]).unwrap()
    }

    #[test]
    fn separable_set_trains_above_95_percent() {
        let ds = separable_dataset(60);
        let fc = feature_cfg();
        let net = NetworkConfig::new(1, 8).unwrap();
        let cfg = TrainConfig {
            seed: 5,
            ..TrainConfig::default()
        };
        let out = train(&ds, &fc, &net, &cfg, SequenceMode::FullHistory).unwrap();
        assert_eq!(out.epoch_mean_loss.len(), 5);
        assert!(out.epoch_mean_loss.iter().all(|l| l.is_finite()));
        assert!(
            out.epoch_mean_loss[4] < out.epoch_mean_loss[0],
            "loss must decrease: {:?}",
            out.epoch_mean_loss
        );
        let acc = classification_accuracy(
            &ds,
            &fc,
            &out.norm,
            &out.params,
            SequenceMode::FullHistory,
            1,
        )
        .unwrap();
        assert!(acc > 0.95, "training accuracy {acc} <= 0.95");
    }

    #[test]
    fn training_is_seed_deterministic() {
        let ds = separable_dataset(12);
        let fc = feature_cfg();
        let net = NetworkConfig::new(1, 4).unwrap();
        let cfg = TrainConfig {
            epochs: 2,
            seed: 42,
            ..TrainConfig::default()
        };
        let a = train(&ds, &fc, &net, &cfg, SequenceMode::FullHistory).unwrap();
        let b = train(&ds, &fc, &net, &cfg, SequenceMode::FullHistory).unwrap();
        assert_eq!(
            a.params, b.params,
            "same seed must give bit-identical params"
        );
        assert_eq!(a.epoch_mean_loss, b.epoch_mean_loss);
    }

    #[test]
    fn zero_epochs_is_rejected() {
        let ds = separable_dataset(6);
        let cfg = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        let err = train(
            &ds,
            &feature_cfg(),
            &NetworkConfig::new(1, 4).unwrap(),
            &cfg,
            SequenceMode::FullHistory,
        );
        assert!(err.is_err());
    }

    #[test]
    fn balanced_sampling_trains() {
        let ds = separable_dataset(12);
        let cfg = TrainConfig {
            epochs: 2,
            negative_sampling: NegativeSampling::Balanced,
            ..TrainConfig::default()
        };
        let out = train(
            &ds,
            &feature_cfg(),
            &NetworkConfig::new(1, 4).unwrap(),
            &cfg,
            SequenceMode::FullHistory,
        )
        .unwrap();
        assert!(out.params.is_finite());
    }

    #[test]
    fn buffered_examples_cover_segment_and_include_final_frame() {
        let ds = separable_dataset(1);
        // 5-frame segments, window length 2, 3 windows per pair.
        let examples = training_examples(&ds, SequenceMode::Buffered { len: 2 }, 3);
        // 3 goals x 3 windows.
        assert_eq!(examples.len(), 9);
        for ex in &examples {
            assert_eq!(ex.end - ex.start, 2);
        }
        assert!(
            examples.iter().any(|e| e.end == 5),
            "final window must be included"
        );
        assert!(
            examples.iter().any(|e| e.end < 5),
            "earlier windows must be sampled"
        );
        // Windows shorter than the buffer when the segment is shorter.
        let short = training_examples(&ds, SequenceMode::Buffered { len: 100 }, 2);
        assert!(short.iter().all(|e| e.start == 0 && e.end == 5));
    }
}
