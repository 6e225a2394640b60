//! Per-goal feature sequences: Euclidean distances, orientation distances,
//! gaze-ray distance, cumulative gaze, and training-set normalization.
//!
//! Every channel is a non-negative scalar time series computed between one
//! body signal and one goal. Distance-like channels shrink as the cue points
//! at the goal; `cumulative_gaze` grows with sustained fixation and is the
//! only channel where larger means more likely.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::datamodel::{Dataset, Frame, Goal, JointId, Segment, Vec3};
use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Channels
// ---------------------------------------------------------------------------

/// The closed set of feature channels. Ordinals (declaration order) are the
/// canonical matrix column order and are stable across versions.
/// "hand" unqualified means the right hand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureChannel {
    HandEuc,
    HandOri,
    HeadOri,
    TorsoOri,
    PelvisOri,
    LshoulderOri,
    RshoulderOri,
    LhandEuc,
    LhandOri,
    Gaze,
    CumulativeGaze,
    HeadEuc,
    TorsoEuc,
    PelvisEuc,
    LshoulderEuc,
    RshoulderEuc,
}

/// What a channel measures, used by the extraction loop.
enum ChannelKind {
    JointEuc(JointId),
    JointOri(JointId),
    Gaze,
    CumulativeGaze,
}

impl FeatureChannel {
    pub const ALL: [FeatureChannel; 16] = [
        FeatureChannel::HandEuc,
        FeatureChannel::HandOri,
        FeatureChannel::HeadOri,
        FeatureChannel::TorsoOri,
        FeatureChannel::PelvisOri,
        FeatureChannel::LshoulderOri,
        FeatureChannel::RshoulderOri,
        FeatureChannel::LhandEuc,
        FeatureChannel::LhandOri,
        FeatureChannel::Gaze,
        FeatureChannel::CumulativeGaze,
        FeatureChannel::HeadEuc,
        FeatureChannel::TorsoEuc,
        FeatureChannel::PelvisEuc,
        FeatureChannel::LshoulderEuc,
        FeatureChannel::RshoulderEuc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureChannel::HandEuc => "hand_euc",
            FeatureChannel::HandOri => "hand_ori",
            FeatureChannel::HeadOri => "head_ori",
            FeatureChannel::TorsoOri => "torso_ori",
            FeatureChannel::PelvisOri => "pelvis_ori",
            FeatureChannel::LshoulderOri => "lshoulder_ori",
            FeatureChannel::RshoulderOri => "rshoulder_ori",
            FeatureChannel::LhandEuc => "lhand_euc",
            FeatureChannel::LhandOri => "lhand_ori",
            FeatureChannel::Gaze => "gaze",
            FeatureChannel::CumulativeGaze => "cumulative_gaze",
            FeatureChannel::HeadEuc => "head_euc",
            FeatureChannel::TorsoEuc => "torso_euc",
            FeatureChannel::PelvisEuc => "pelvis_euc",
            FeatureChannel::LshoulderEuc => "lshoulder_euc",
            FeatureChannel::RshoulderEuc => "rshoulder_euc",
        }
    }

    pub fn ordinal(self) -> usize {
        FeatureChannel::ALL
            .iter()
            .position(|c| *c == self)
            .expect("channel in ALL")
    }

    /// Baseline decision direction: true when larger values indicate the
    /// goal (only `cumulative_gaze`), false for all distance-like channels.
    pub fn prefers_larger(self) -> bool {
        matches!(self, FeatureChannel::CumulativeGaze)
    }

    fn kind(self) -> ChannelKind {
        match self {
            FeatureChannel::HandEuc => ChannelKind::JointEuc(JointId::RightHand),
            FeatureChannel::HandOri => ChannelKind::JointOri(JointId::RightHand),
            FeatureChannel::HeadOri => ChannelKind::JointOri(JointId::Head),
            FeatureChannel::TorsoOri => ChannelKind::JointOri(JointId::Torso),
            FeatureChannel::PelvisOri => ChannelKind::JointOri(JointId::Pelvis),
            FeatureChannel::LshoulderOri => ChannelKind::JointOri(JointId::LeftShoulder),
            FeatureChannel::RshoulderOri => ChannelKind::JointOri(JointId::RightShoulder),
            FeatureChannel::LhandEuc => ChannelKind::JointEuc(JointId::LeftHand),
            FeatureChannel::LhandOri => ChannelKind::JointOri(JointId::LeftHand),
            FeatureChannel::Gaze => ChannelKind::Gaze,
            FeatureChannel::CumulativeGaze => ChannelKind::CumulativeGaze,
            FeatureChannel::HeadEuc => ChannelKind::JointEuc(JointId::Head),
            FeatureChannel::TorsoEuc => ChannelKind::JointEuc(JointId::Torso),
            FeatureChannel::PelvisEuc => ChannelKind::JointEuc(JointId::Pelvis),
            FeatureChannel::LshoulderEuc => ChannelKind::JointEuc(JointId::LeftShoulder),
            FeatureChannel::RshoulderEuc => ChannelKind::JointEuc(JointId::RightShoulder),
        }
    }
}

impl fmt::Display for FeatureChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for FeatureChannel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FeatureChannel::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown feature channel `{s}`")))
    }
}

/// How the `gaze` channel (and the series feeding `cumulative_gaze`) is
/// measured. The ray distance is the default: its values are meters, matching
/// the fixation threshold unit. The chord variant treats gaze like the joint
/// orientation channels (unit-vector difference, range [0, 2]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GazeMetric {
    #[default]
    RayDistance,
    DirectionChord,
}

impl fmt::Display for GazeMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            GazeMetric::RayDistance => "ray",
            GazeMetric::DirectionChord => "chord",
        })
    }
}

impl FromStr for GazeMetric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ray" | "ray_distance" => Ok(GazeMetric::RayDistance),
            "chord" | "direction_chord" => Ok(GazeMetric::DirectionChord),
            other => Err(Error::Config(format!("unknown gaze metric `{other}`"))),
        }
    }
}

/// Channel selection plus the gaze fixation threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub channels: Vec<FeatureChannel>,
    /// Fixation threshold for `cumulative_gaze`, meters (ray metric).
    pub gaze_fix_threshold_m: f64,
    #[serde(default)]
    pub gaze_metric: GazeMetric,
}

pub const DEFAULT_GAZE_FIX_THRESHOLD_M: f64 = 0.1;

impl FeatureConfig {
    pub fn new(channels: Vec<FeatureChannel>) -> Result<FeatureConfig> {
        let cfg = FeatureConfig {
            channels,
            gaze_fix_threshold_m: DEFAULT_GAZE_FIX_THRESHOLD_M,
            gaze_metric: GazeMetric::RayDistance,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.channels.is_empty() {
            return Err(Error::Config("channel list must not be empty".into()));
        }
        for (i, c) in self.channels.iter().enumerate() {
            if self.channels[..i].contains(c) {
                return Err(Error::Config(format!("duplicate channel `{c}`")));
            }
        }
        let threshold_ok = self.gaze_fix_threshold_m > 0.0;
        if !threshold_ok {
            return Err(Error::Config(format!(
                "gaze fixation threshold must be > 0, got {}",
                self.gaze_fix_threshold_m
            )));
        }
        Ok(())
    }

    /// All sixteen channels in canonical order.
    pub fn full() -> FeatureConfig {
        FeatureConfig::new(FeatureChannel::ALL.to_vec()).expect("full set is valid")
    }

    /// The reduced cue set: gaze, cumulative gaze, head orientation, hand
    /// position, hand orientation.
    pub fn reduced() -> FeatureConfig {
        FeatureConfig::new(vec![
            FeatureChannel::Gaze,
            FeatureChannel::CumulativeGaze,
            FeatureChannel::HeadOri,
            FeatureChannel::HandEuc,
            FeatureChannel::HandOri,
        ])
        .expect("reduced set is valid")
    }

    /// Hand and head positions/orientations only; no gaze channels.
    pub fn no_gaze() -> FeatureConfig {
        FeatureConfig::new(vec![
            FeatureChannel::HandEuc,
            FeatureChannel::HandOri,
            FeatureChannel::HeadEuc,
            FeatureChannel::HeadOri,
        ])
        .expect("no-gaze set is valid")
    }

    fn index_of(&self, c: FeatureChannel) -> Option<usize> {
        self.channels.iter().position(|x| *x == c)
    }
}

// ---------------------------------------------------------------------------
// Feature matrices
// ---------------------------------------------------------------------------

/// T x F matrix of raw or normalized cue values for one (segment, goal) pair.
/// Row-major storage; column order is the configured channel order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    values: Vec<f64>,
    rows: usize,
    channels: Vec<FeatureChannel>,
    goal_id: String,
}

impl FeatureMatrix {
    pub fn new(
        values: Vec<f64>,
        rows: usize,
        channels: Vec<FeatureChannel>,
        goal_id: String,
    ) -> FeatureMatrix {
        assert_eq!(values.len(), rows * channels.len(), "matrix shape mismatch");
        FeatureMatrix {
            values,
            rows,
            channels,
            goal_id,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.channels.len()
    }

    pub fn channels(&self) -> &[FeatureChannel] {
        &self.channels
    }

    pub fn goal_id(&self) -> &str {
        &self.goal_id
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.channels.len() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let f = self.channels.len();
        &self.values[row * f..(row + 1) * f]
    }

    /// Matrix restricted to the first `rows` rows (a time prefix).
    pub fn prefix(&self, rows: usize) -> FeatureMatrix {
        assert!(rows <= self.rows);
        FeatureMatrix {
            values: self.values[..rows * self.channels.len()].to_vec(),
            rows,
            channels: self.channels.clone(),
            goal_id: self.goal_id.clone(),
        }
    }
}

/// Per-channel training-set means used for normalization (division by mean).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub channels: Vec<FeatureChannel>,
    pub means: Vec<f64>,
}

// ---------------------------------------------------------------------------
// Scalar ops
// ---------------------------------------------------------------------------

/// Euclidean distance between a joint position and a goal position, meters.
pub fn euclidean_distance(joint_pos: Vec3, goal_pos: Vec3) -> f64 {
    (joint_pos - goal_pos).norm()
}

/// Distance between a unit forward vector and the unit vector pointing from
/// `from_pos` to `goal_pos` (chord metric, range [0, 2]). Errors when the
/// goal coincides with `from_pos`, leaving the goal direction undefined.
pub fn direction_distance(forward: Vec3, from_pos: Vec3, goal_pos: Vec3) -> Result<f64> {
    let toward = (goal_pos - from_pos).normalized().ok_or_else(|| {
        Error::Invalid(format!(
            "direction to goal undefined: goal at ({}, {}, {}) coincides with the joint position",
            goal_pos.x, goal_pos.y, goal_pos.z
        ))
    })?;
    Ok((forward - toward).norm())
}

/// Distance from `goal_pos` to the half-line starting at `origin` along the
/// unit direction `dir`, meters. Points behind the origin clamp to the
/// origin distance.
pub fn gaze_ray_distance(origin: Vec3, dir: Vec3, goal_pos: Vec3) -> f64 {
    let rel = goal_pos - origin;
    let s = rel.dot(dir);
    if s <= 0.0 {
        rel.norm()
    } else {
        (rel - dir.scale(s)).norm()
    }
}

/// Running count of frames whose gaze distance fell strictly under the
/// fixation threshold: `out[t] = |{ k <= t : dists[k] < threshold }|`.
pub fn cumulative_gaze(gaze_dists: &[f64], threshold_m: f64) -> Vec<f64> {
    let mut count = 0.0;
    gaze_dists
        .iter()
        .map(|&d| {
            if d < threshold_m {
                count += 1.0;
            }
            count
        })
        .collect()
}

fn gaze_distance(metric: GazeMetric, origin: Vec3, dir: Vec3, goal_pos: Vec3) -> Result<f64> {
    match metric {
        GazeMetric::RayDistance => Ok(gaze_ray_distance(origin, dir, goal_pos)),
        GazeMetric::DirectionChord => direction_distance(dir, origin, goal_pos),
    }
}

// ---------------------------------------------------------------------------
// Extraction
// ---------------------------------------------------------------------------

/// Raw (un-normalized) feature matrix for one segment against one goal.
pub fn extract_features(seg: &Segment, goal: &Goal, cfg: &FeatureConfig) -> Result<FeatureMatrix> {
    extract_frame_features(&seg.frames, goal, cfg)
}

/// Same as [`extract_features`] but over an arbitrary frame window, so
/// buffered inference can slice without copying segments. `cumulative_gaze`
/// counts fixation frames within the given window only.
pub fn extract_frame_features(
    frames: &[Frame],
    goal: &Goal,
    cfg: &FeatureConfig,
) -> Result<FeatureMatrix> {
    let f = cfg.channels.len();
    let mut values = vec![0.0; frames.len() * f];

    let needs_gaze_series = cfg
        .channels
        .iter()
        .any(|c| matches!(c, FeatureChannel::Gaze | FeatureChannel::CumulativeGaze));
    let gaze_series: Vec<f64> = if needs_gaze_series {
        let mut out = Vec::with_capacity(frames.len());
        for (fi, fr) in frames.iter().enumerate() {
            let d = gaze_distance(cfg.gaze_metric, fr.gaze_origin, fr.gaze_dir, goal.position)
                .map_err(|e| at_frame(e, fi, &goal.id))?;
            out.push(d);
        }
        out
    } else {
        Vec::new()
    };
    let cum_series: Vec<f64> = if cfg.index_of(FeatureChannel::CumulativeGaze).is_some() {
        cumulative_gaze(&gaze_series, cfg.gaze_fix_threshold_m)
    } else {
        Vec::new()
    };

    for (fi, fr) in frames.iter().enumerate() {
        for (ci, ch) in cfg.channels.iter().enumerate() {
            let v = match ch.kind() {
                ChannelKind::JointEuc(j) => {
                    euclidean_distance(fr.joints.get(j).position, goal.position)
                }
                ChannelKind::JointOri(j) => {
                    let jp = fr.joints.get(j);
                    direction_distance(jp.forward, jp.position, goal.position)
                        .map_err(|e| at_frame(e, fi, &goal.id))?
                }
                ChannelKind::Gaze => gaze_series[fi],
                ChannelKind::CumulativeGaze => cum_series[fi],
            };
            values[fi * f + ci] = v;
        }
    }

    Ok(FeatureMatrix::new(
        values,
        frames.len(),
        cfg.channels.clone(),
        goal.id.clone(),
    ))
}

fn at_frame(e: Error, frame: usize, goal_id: &str) -> Error {
    Error::Invalid(format!("frame {frame}, goal `{goal_id}`: {e}"))
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

/// Per-channel mean over every (segment, goal, frame) triple in the training
/// set. Errors if the set yields no samples or a channel's mean is zero.
pub fn fit_normalizer(train: &Dataset, cfg: &FeatureConfig) -> Result<NormStats> {
    cfg.validate()?;
    let f = cfg.channels.len();
    let mut sums = vec![0.0; f];
    let mut count = 0u64;
    for seg in &train.segments {
        for goal in train.goal_set.goals() {
            let m = extract_features(seg, goal, cfg)?;
            for r in 0..m.rows() {
                let row = m.row(r);
                for (ci, v) in row.iter().enumerate() {
                    sums[ci] += v;
                }
            }
            count += m.rows() as u64;
        }
    }
    if count == 0 {
        return Err(Error::Invalid(
            "training set yields no feature samples".into(),
        ));
    }
    let means: Vec<f64> = sums.iter().map(|s| s / count as f64).collect();
    for (ci, mean) in means.iter().enumerate() {
        let mean_ok = *mean > 0.0;
        if !mean_ok {
            return Err(Error::Numeric(format!(
                "channel `{}` has zero mean on the training set; cannot normalize",
                cfg.channels[ci]
            )));
        }
    }
    Ok(NormStats {
        channels: cfg.channels.clone(),
        means,
    })
}

/// Divides each column by its training-set mean.
pub fn apply_normalizer(m: &FeatureMatrix, stats: &NormStats) -> Result<FeatureMatrix> {
    if m.channels() != stats.channels.as_slice() {
        return Err(Error::Config(format!(
            "channel mismatch: matrix has {:?}, normalizer has {:?}",
            m.channels().iter().map(|c| c.name()).collect::<Vec<_>>(),
            stats.channels.iter().map(|c| c.name()).collect::<Vec<_>>()
        )));
    }
    let f = m.cols();
    let mut values = Vec::with_capacity(m.rows() * f);
    for r in 0..m.rows() {
        for (ci, v) in m.row(r).iter().enumerate() {
            values.push(v / stats.means[ci]);
        }
    }
    Ok(FeatureMatrix::new(
        values,
        m.rows(),
        stats.channels.clone(),
        m.goal_id().to_string(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::{Frame, Goal, JointPose, Joints};

    fn v(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3::new(x, y, z)
    }

    #[test]
    fn euclidean_examples() {
        assert_eq!(euclidean_distance(v(0.0, 0.0, 0.0), v(3.0, 4.0, 0.0)), 5.0);
        assert_eq!(euclidean_distance(v(1.0, 2.0, 3.0), v(1.0, 2.0, 3.0)), 0.0);
        let d = euclidean_distance(v(1.0, 1.0, 1.0), v(2.0, 2.0, 2.0));
        assert!((d - 3.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn direction_examples() {
        let fx = v(1.0, 0.0, 0.0);
        assert_eq!(
            direction_distance(fx, v(0.0, 0.0, 0.0), v(5.0, 0.0, 0.0)).unwrap(),
            0.0
        );
        let anti = direction_distance(fx, v(0.0, 0.0, 0.0), v(-3.0, 0.0, 0.0)).unwrap();
        assert!((anti - 2.0).abs() < 1e-12);
        let perp = direction_distance(fx, v(0.0, 0.0, 0.0), v(0.0, 7.0, 0.0)).unwrap();
        assert!((perp - 2.0f64.sqrt()).abs() < 1e-12);
        assert!(direction_distance(fx, v(1.0, 1.0, 1.0), v(1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn ray_examples() {
        let o = v(0.0, 0.0, 0.0);
        let d = v(1.0, 0.0, 0.0);
        assert_eq!(gaze_ray_distance(o, d, v(2.0, 0.0, 0.0)), 0.0);
        assert!((gaze_ray_distance(o, d, v(2.0, 1.0, 0.0)) - 1.0).abs() < 1e-12);
        // Behind the origin: clamps to the origin distance.
        let behind = gaze_ray_distance(o, d, v(-1.0, 1.0, 0.0));
        assert!((behind - 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn cumulative_examples() {
        assert_eq!(
            cumulative_gaze(&[0.05, 0.2, 0.08], 0.1),
            vec![1.0, 1.0, 2.0]
        );
        assert_eq!(cumulative_gaze(&[0.5, 0.5], 0.1), vec![0.0, 0.0]);
        assert_eq!(cumulative_gaze(&[], 0.1), Vec::<f64>::new());
    }

    fn pose_at(p: Vec3, f: Vec3) -> JointPose {
        JointPose {
            position: p,
            forward: f,
        }
    }

    /// A fully hand-specified frame used by the extraction tests.
    fn test_frame(t: f64, hand: Vec3, gaze_dir: Vec3) -> Frame {
        let fwd = v(1.0, 0.0, 0.0);
        Frame {
            t,
            gaze_origin: v(0.0, 0.0, 1.6),
            gaze_dir,
            joints: Joints {
                head: pose_at(v(0.0, 0.0, 1.6), fwd),
                torso: pose_at(v(0.0, 0.0, 1.2), fwd),
                pelvis: pose_at(v(0.0, 0.0, 1.0), fwd),
                left_hand: pose_at(v(0.0, 0.3, 1.0), fwd),
                right_hand: pose_at(hand, fwd),
                left_shoulder: pose_at(v(0.0, 0.2, 1.4), fwd),
                right_shoulder: pose_at(v(0.0, -0.2, 1.4), fwd),
            },
        }
    }

    fn seg_of(frames: Vec<Frame>) -> Segment {
        Segment {
            frames,
            frame_rate_hz: 120.0,
            picked_goal: "g".into(),
            subject_id: "s".into(),
        }
    }

    #[test]
    fn extract_single_channel() {
        let seg = seg_of(vec![test_frame(0.0, v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0))]);
        let goal = Goal {
            id: "g".into(),
            position: v(3.0, 4.0, 0.0),
            macro_id: "m".into(),
        };
        let cfg = FeatureConfig::new(vec![FeatureChannel::HandEuc]).unwrap();
        let m = extract_features(&seg, &goal, &cfg).unwrap();
        assert_eq!(m.rows(), 1);
        assert_eq!(m.at(0, 0), 5.0);
    }

    #[test]
    fn extract_gaze_on_goal_every_frame() {
        // Gaze ray passes exactly through the goal in all frames.
        let goal_pos = v(2.0, 0.0, 1.6);
        let frames: Vec<Frame> = (0..4)
            .map(|i| test_frame(i as f64 / 120.0, v(0.1, 0.0, 1.0), v(1.0, 0.0, 0.0)))
            .collect();
        let seg = seg_of(frames);
        let goal = Goal {
            id: "g".into(),
            position: goal_pos,
            macro_id: "m".into(),
        };
        let cfg =
            FeatureConfig::new(vec![FeatureChannel::Gaze, FeatureChannel::CumulativeGaze]).unwrap();
        let m = extract_features(&seg, &goal, &cfg).unwrap();
        for r in 0..4 {
            assert!(m.at(r, 0).abs() < 1e-12);
            assert_eq!(m.at(r, 1), (r + 1) as f64);
        }
    }

    #[test]
    fn degenerate_direction_reports_frame_index() {
        let bad = test_frame(0.0, v(1.0, 1.0, 1.0), v(1.0, 0.0, 0.0));
        let seg = seg_of(vec![
            test_frame(1.0 / 120.0, v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0)),
            bad,
        ]);
        // Goal coincides with the right hand in frame 1 (the second frame).
        let goal = Goal {
            id: "g".into(),
            position: v(1.0, 1.0, 1.0),
            macro_id: "m".into(),
        };
        let cfg = FeatureConfig::new(vec![FeatureChannel::HandOri]).unwrap();
        let err = extract_features(&seg, &goal, &cfg).unwrap_err();
        assert!(err.to_string().contains("frame 1"), "got: {err}");
    }

    #[test]
    fn normalizer_examples() {
        // Column of constant 4.0 -> mean 4.0 -> normalized column of 1.0.
        let m = FeatureMatrix::new(
            vec![4.0, 4.0, 4.0],
            3,
            vec![FeatureChannel::HandEuc],
            "g".into(),
        );
        let stats = NormStats {
            channels: vec![FeatureChannel::HandEuc],
            means: vec![4.0],
        };
        let n = apply_normalizer(&m, &stats).unwrap();
        for r in 0..3 {
            assert_eq!(n.at(r, 0), 1.0);
        }
        // Zero raw value stays zero.
        let m0 = FeatureMatrix::new(vec![0.0], 1, vec![FeatureChannel::HandEuc], "g".into());
        assert_eq!(apply_normalizer(&m0, &stats).unwrap().at(0, 0), 0.0);
    }

    #[test]
    fn normalizer_rejects_channel_mismatch() {
        let m = FeatureMatrix::new(vec![1.0], 1, vec![FeatureChannel::HandEuc], "g".into());
        let stats = NormStats {
            channels: vec![FeatureChannel::Gaze],
            means: vec![1.0],
        };
        assert!(apply_normalizer(&m, &stats).is_err());
    }

    // -- independent straight-line oracle for the full 16-channel extraction --

    fn oracle_euc(a: Vec3, b: Vec3) -> f64 {
        ((a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2)).sqrt()
    }

    fn oracle_ori(fwd: Vec3, from: Vec3, goal: Vec3) -> f64 {
        // sqrt(2 - 2 cos(theta)) route, algebraically distinct from the
        // chord-vector subtraction used by the implementation.
        let dx = goal.x - from.x;
        let dy = goal.y - from.y;
        let dz = goal.z - from.z;
        let n = (dx * dx + dy * dy + dz * dz).sqrt();
        let cos = (fwd.x * dx + fwd.y * dy + fwd.z * dz) / n;
        (2.0 - 2.0 * cos).max(0.0).sqrt()
    }

    fn oracle_ray(origin: Vec3, dir: Vec3, goal: Vec3) -> f64 {
        // Ternary search over s >= 0 for min ||origin + s*dir - goal||.
        let eval = |s: f64| {
            let px = origin.x + s * dir.x - goal.x;
            let py = origin.y + s * dir.y - goal.y;
            let pz = origin.z + s * dir.z - goal.z;
            (px * px + py * py + pz * pz).sqrt()
        };
        let (mut lo, mut hi) = (0.0f64, 1e3f64);
        for _ in 0..300 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if eval(m1) < eval(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        eval(0.5 * (lo + hi))
    }

    #[test]
    fn full_channel_extraction_matches_oracle() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let rand_unit = |rng: &mut rand_chacha::ChaCha8Rng| loop {
            let c = v(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            if let Some(u) = c.normalized() {
                return u;
            }
        };
        let mut frames = Vec::new();
        for i in 0..3 {
            let pv = |rng: &mut rand_chacha::ChaCha8Rng| {
                v(
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                    rng.random_range(0.0..2.0),
                )
            };
            let joints = Joints {
                head: pose_at(pv(&mut rng), rand_unit(&mut rng)),
                torso: pose_at(pv(&mut rng), rand_unit(&mut rng)),
                pelvis: pose_at(pv(&mut rng), rand_unit(&mut rng)),
                left_hand: pose_at(pv(&mut rng), rand_unit(&mut rng)),
                right_hand: pose_at(pv(&mut rng), rand_unit(&mut rng)),
                left_shoulder: pose_at(pv(&mut rng), rand_unit(&mut rng)),
                right_shoulder: pose_at(pv(&mut rng), rand_unit(&mut rng)),
            };
            frames.push(Frame {
                t: i as f64 / 120.0,
                gaze_origin: pv(&mut rng),
                gaze_dir: rand_unit(&mut rng),
                joints,
            });
        }
        let goal = Goal {
            id: "g".into(),
            position: v(5.0, 5.0, 1.0),
            macro_id: "m".into(),
        };
        let seg = seg_of(frames.clone());
        let cfg = FeatureConfig::full();
        let m = extract_features(&seg, &goal, &cfg).unwrap();

        let joint_of = |fr: &Frame, id: JointId| *fr.joints.get(id);
        let gaze_dists: Vec<f64> = frames
            .iter()
            .map(|fr| oracle_ray(fr.gaze_origin, fr.gaze_dir, goal.position))
            .collect();
        for (fi, fr) in frames.iter().enumerate() {
            for (ci, ch) in cfg.channels.iter().enumerate() {
                let expected = match ch {
                    FeatureChannel::HandEuc => {
                        oracle_euc(joint_of(fr, JointId::RightHand).position, goal.position)
                    }
                    FeatureChannel::HandOri => {
                        let j = joint_of(fr, JointId::RightHand);
                        oracle_ori(j.forward, j.position, goal.position)
                    }
                    FeatureChannel::HeadOri => {
                        let j = joint_of(fr, JointId::Head);
                        oracle_ori(j.forward, j.position, goal.position)
                    }
                    FeatureChannel::TorsoOri => {
                        let j = joint_of(fr, JointId::Torso);
                        oracle_ori(j.forward, j.position, goal.position)
                    }
                    FeatureChannel::PelvisOri => {
                        let j = joint_of(fr, JointId::Pelvis);
                        oracle_ori(j.forward, j.position, goal.position)
                    }
                    FeatureChannel::LshoulderOri => {
                        let j = joint_of(fr, JointId::LeftShoulder);
                        oracle_ori(j.forward, j.position, goal.position)
                    }
                    FeatureChannel::RshoulderOri => {
                        let j = joint_of(fr, JointId::RightShoulder);
                        oracle_ori(j.forward, j.position, goal.position)
                    }
                    FeatureChannel::LhandEuc => {
                        oracle_euc(joint_of(fr, JointId::LeftHand).position, goal.position)
                    }
                    FeatureChannel::LhandOri => {
                        let j = joint_of(fr, JointId::LeftHand);
                        oracle_ori(j.forward, j.position, goal.position)
                    }
                    FeatureChannel::Gaze => gaze_dists[fi],
                    FeatureChannel::CumulativeGaze => {
                        let mut n = 0.0;
                        for d in &gaze_dists[..=fi] {
                            if *d < cfg.gaze_fix_threshold_m {
                                n += 1.0;
                            }
                        }
                        n
                    }
                    FeatureChannel::HeadEuc => {
                        oracle_euc(joint_of(fr, JointId::Head).position, goal.position)
                    }
                    FeatureChannel::TorsoEuc => {
                        oracle_euc(joint_of(fr, JointId::Torso).position, goal.position)
                    }
                    FeatureChannel::PelvisEuc => {
                        oracle_euc(joint_of(fr, JointId::Pelvis).position, goal.position)
                    }
                    FeatureChannel::LshoulderEuc => {
                        oracle_euc(joint_of(fr, JointId::LeftShoulder).position, goal.position)
                    }
                    FeatureChannel::RshoulderEuc => {
                        oracle_euc(joint_of(fr, JointId::RightShoulder).position, goal.position)
                    }
                };
                let got = m.at(fi, ci);
                assert!(
                    (got - expected).abs() < 1e-9,
                    "channel {ch} frame {fi}: got {got}, oracle {expected}"
                );
            }
        }
    }

    #[test]
    fn fit_normalizer_matches_brute_force_mean() {
        use crate::datamodel::GoalSet;
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let goals = GoalSet::new(vec![
            Goal {
                id: "a".into(),
                position: v(1.0, 0.0, 1.0),
                macro_id: "m".into(),
            },
            Goal {
                id: "b".into(),
                position: v(-1.0, 0.5, 1.0),
                macro_id: "m".into(),
            },
        ])
        .unwrap();
        let mut segments = Vec::new();
        for _ in 0..10 {
            let n = rng.random_range(2..6);
            let frames: Vec<Frame> = (0..n)
                .map(|i| {
                    test_frame(
                        i as f64 / 120.0,
                        v(
                            rng.random_range(-2.0..2.0),
                            rng.random_range(-2.0..2.0),
                            1.0,
                        ),
                        v(1.0, 0.0, 0.0),
                    )
                })
                .collect();
            segments.push(Segment {
                frames,
                frame_rate_hz: 120.0,
                picked_goal: "a".into(),
                subject_id: "s".into(),
            });
        }
        let ds = Dataset::new(goals, segments).unwrap();
        let cfg = FeatureConfig::new(vec![FeatureChannel::HandEuc, FeatureChannel::Gaze]).unwrap();
        let stats = fit_normalizer(&ds, &cfg).unwrap();

        // Brute force: accumulate every value independently.
        let mut sum = [0.0f64; 2];
        let mut n = 0u64;
        for seg in &ds.segments {
            for goal in ds.goal_set.goals() {
                for fr in &seg.frames {
                    sum[0] += oracle_euc(fr.joints.right_hand.position, goal.position);
                    sum[1] += oracle_ray(fr.gaze_origin, fr.gaze_dir, goal.position);
                    n += 1;
                }
            }
        }
        for (c, channel_sum) in sum.iter().enumerate() {
            let expect = channel_sum / n as f64;
            assert!(
                (stats.means[c] - expect).abs() < 1e-9,
                "channel {c}: got {}, brute force {expect}",
                stats.means[c]
            );
        }
    }
}
