//! Canonical data types for pick segments, goals and datasets, plus file
//! ingestion and subject-based splitting.
//!
//! The on-disk format is line-delimited JSON (UTF-8): line 1 is a header
//! record with the format version, the frame rate and the goal set; every
//! following line is one segment record. See `docs/dataset-format.md` for the
//! full schema and `docs/mogaze-adapter.md` for the mapping contract used to
//! convert motion-capture recordings into this format.

use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Current on-disk format version, stored in the header record.
pub const FORMAT_VERSION: u32 = 1;

/// Tolerance for "unit vector" invariants on stored directions.
pub const UNIT_NORM_TOL: f64 = 1e-6;

/// Allowed relative deviation of inter-frame spacing from `1/frame_rate_hz`.
pub const FRAME_SPACING_TOL: f64 = 0.10;

// ---------------------------------------------------------------------------
// Geometry primitives
// ---------------------------------------------------------------------------

/// A 3D point or direction. Meters for positions, dimensionless for unit
/// direction vectors. Serialized as a plain `[x, y, z]` array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    /// Unit vector along `self`, or `None` when the length is (nearly) zero.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        if n < 1e-12 {
            None
        } else {
            Some(self.scale(1.0 / n))
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn is_unit(self) -> bool {
        (self.norm() - 1.0).abs() <= UNIT_NORM_TOL
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

// ---------------------------------------------------------------------------
// Skeleton and frames
// ---------------------------------------------------------------------------

/// One tracked joint: a position and a unit forward direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointPose {
    /// Position in meters.
    #[serde(rename = "p")]
    pub position: Vec3,
    /// Unit direction the joint is facing.
    #[serde(rename = "f")]
    pub forward: Vec3,
}

/// The fixed joint set tracked per frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JointId {
    Head,
    Torso,
    Pelvis,
    LeftHand,
    RightHand,
    LeftShoulder,
    RightShoulder,
}

impl JointId {
    pub const ALL: [JointId; 7] = [
        JointId::Head,
        JointId::Torso,
        JointId::Pelvis,
        JointId::LeftHand,
        JointId::RightHand,
        JointId::LeftShoulder,
        JointId::RightShoulder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            JointId::Head => "head",
            JointId::Torso => "torso",
            JointId::Pelvis => "pelvis",
            JointId::LeftHand => "left_hand",
            JointId::RightHand => "right_hand",
            JointId::LeftShoulder => "left_shoulder",
            JointId::RightShoulder => "right_shoulder",
        }
    }
}

/// Poses for all seven tracked joints. Using a struct rather than a map makes
/// the "all joints present" invariant a type-level guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Joints {
    pub head: JointPose,
    pub torso: JointPose,
    pub pelvis: JointPose,
    pub left_hand: JointPose,
    pub right_hand: JointPose,
    pub left_shoulder: JointPose,
    pub right_shoulder: JointPose,
}

impl Joints {
    pub fn get(&self, id: JointId) -> &JointPose {
        match id {
            JointId::Head => &self.head,
            JointId::Torso => &self.torso,
            JointId::Pelvis => &self.pelvis,
            JointId::LeftHand => &self.left_hand,
            JointId::RightHand => &self.right_hand,
            JointId::LeftShoulder => &self.left_shoulder,
            JointId::RightShoulder => &self.right_shoulder,
        }
    }
}

/// One capture frame: timestamp, joint poses and the gaze ray.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    /// Seconds since the start of the segment; non-decreasing.
    pub t: f64,
    /// Gaze ray origin (eye position), meters.
    pub gaze_origin: Vec3,
    /// Gaze ray direction, unit vector.
    pub gaze_dir: Vec3,
    pub joints: Joints,
}

// ---------------------------------------------------------------------------
// Goals
// ---------------------------------------------------------------------------

/// A labeled object the human may pick, with a fixed position and a coarse
/// macro location (e.g. one of several shelves or a table).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Goal {
    pub id: String,
    pub position: Vec3,
    pub macro_id: String,
}

/// The ordered set of N goals a dataset is labeled against.
#[derive(Debug, Clone, PartialEq)]
pub struct GoalSet {
    goals: Vec<Goal>,
}

impl GoalSet {
    /// Validates: N >= 2, unique ids, non-empty macro ids, pairwise distinct
    /// finite positions.
    pub fn new(goals: Vec<Goal>) -> Result<GoalSet> {
        if goals.len() < 2 {
            return Err(Error::Invalid(format!(
                "goal set must contain at least 2 goals, got {}",
                goals.len()
            )));
        }
        let mut ids = BTreeSet::new();
        for g in &goals {
            if !ids.insert(g.id.clone()) {
                return Err(Error::Invalid(format!("duplicate goal id `{}`", g.id)));
            }
            if g.macro_id.is_empty() {
                return Err(Error::Invalid(format!(
                    "goal `{}` has an empty macro_id",
                    g.id
                )));
            }
            if !g.position.is_finite() {
                return Err(Error::Invalid(format!(
                    "goal `{}` has a non-finite position",
                    g.id
                )));
            }
        }
        for i in 0..goals.len() {
            for j in (i + 1)..goals.len() {
                if (goals[i].position - goals[j].position).norm() < 1e-9 {
                    return Err(Error::Invalid(format!(
                        "goals `{}` and `{}` share the same position",
                        goals[i].id, goals[j].id
                    )));
                }
            }
        }
        Ok(GoalSet { goals })
    }

    pub fn goals(&self) -> &[Goal] {
        &self.goals
    }

    pub fn len(&self) -> usize {
        self.goals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.goals.is_empty()
    }

    pub fn get(&self, ordinal: usize) -> &Goal {
        &self.goals[ordinal]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.goals.iter().position(|g| g.id == id)
    }
}

impl fmt::Display for GoalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} goals", self.goals.len())
    }
}

// ---------------------------------------------------------------------------
// Segments and datasets
// ---------------------------------------------------------------------------

/// One pick action: frames leading up to the grasp, labeled with the picked
/// goal. The grasp occurs at the final frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub frames: Vec<Frame>,
    pub frame_rate_hz: f64,
    pub picked_goal: String,
    pub subject_id: String,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// A goal set plus the segments labeled against it.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub goal_set: GoalSet,
    pub segments: Vec<Segment>,
}

impl Dataset {
    /// Builds a dataset, checking every segment invariant. Emits a warning
    /// (but succeeds) when the segment list is empty.
    pub fn new(goal_set: GoalSet, segments: Vec<Segment>) -> Result<Dataset> {
        for (idx, seg) in segments.iter().enumerate() {
            validate_segment(idx, seg, &goal_set)?;
        }
        if segments.is_empty() {
            log::warn!("dataset has a goal set but zero segments");
        }
        Ok(Dataset { goal_set, segments })
    }

    /// The shared frame rate of all segments (the header value on disk).
    pub fn frame_rate_hz(&self) -> f64 {
        self.segments
            .first()
            .map(|s| s.frame_rate_hz)
            .unwrap_or(120.0)
    }

    /// Serializes to the canonical line-delimited format.
    pub fn to_jsonl(&self) -> String {
        let header = HeaderRecord {
            version: FORMAT_VERSION,
            frame_rate_hz: self.frame_rate_hz(),
            goals: self.goal_set.goals().to_vec(),
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for seg in &self.segments {
            let rec = SegmentRecord {
                subject_id: seg.subject_id.clone(),
                picked_goal: seg.picked_goal.clone(),
                frames: seg.frames.clone(),
            };
            out.push_str(&serde_json::to_string(&rec).expect("segment serializes"));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_jsonl().as_bytes())
            .map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Subject ids present, sorted.
    pub fn subjects(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self
            .segments
            .iter()
            .map(|s| s.subject_id.as_str())
            .collect();
        set.into_iter().map(String::from).collect()
    }
}

// Wire records -- field order here defines the on-disk field order.

#[derive(Serialize, Deserialize)]
struct HeaderRecord {
    version: u32,
    frame_rate_hz: f64,
    goals: Vec<Goal>,
}

#[derive(Serialize, Deserialize)]
struct SegmentRecord {
    subject_id: String,
    picked_goal: String,
    frames: Vec<Frame>,
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

/// Loads and fully validates a dataset from the canonical line-delimited
/// format. Parse errors carry the 1-based line number; invariant violations
/// name the segment index and offending field.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let header: HeaderRecord = match lines.next() {
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty file, missing header record".into(),
            })
        }
        Some((_, line)) => {
            let line = line.map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: 1,
                message: format!("bad header record: {e}"),
            })?
        }
    };

    if header.version != FORMAT_VERSION {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "unsupported format version {} (expected {})",
                header.version, FORMAT_VERSION
            ),
        });
    }
    if !(header.frame_rate_hz.is_finite() && header.frame_rate_hz > 0.0) {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "frame_rate_hz must be positive, got {}",
                header.frame_rate_hz
            ),
        });
    }

    let goal_set = GoalSet::new(header.goals)?;

    let mut segments = Vec::new();
    for (lineno, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SegmentRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno + 1,
            message: format!("bad segment record: {e}"),
        })?;
        segments.push(Segment {
            frames: rec.frames,
            frame_rate_hz: header.frame_rate_hz,
            picked_goal: rec.picked_goal,
            subject_id: rec.subject_id,
        });
    }

    Dataset::new(goal_set, segments)
}

fn validate_segment(idx: usize, seg: &Segment, goals: &GoalSet) -> Result<()> {
    let fail = |field: &'static str, message: String| {
        Err(Error::Segment {
            segment: idx,
            field,
            message,
        })
    };

    if seg.frames.is_empty() {
        return fail("frames", "segment has no frames".into());
    }
    if goals.index_of(&seg.picked_goal).is_none() {
        return fail(
            "picked_goal",
            format!("goal id `{}` is not in the goal set", seg.picked_goal),
        );
    }
    let dt_nominal = 1.0 / seg.frame_rate_hz;
    for (fi, frame) in seg.frames.iter().enumerate() {
        if !frame.t.is_finite() {
            return fail("t", format!("frame {fi}: non-finite timestamp"));
        }
        if !(frame.gaze_origin.is_finite() && frame.gaze_dir.is_finite()) {
            return fail("gaze", format!("frame {fi}: non-finite gaze"));
        }
        if !frame.gaze_dir.is_unit() {
            return fail(
                "gaze_dir",
                format!(
                    "frame {fi}: |gaze_dir| = {} is not a unit vector",
                    frame.gaze_dir.norm()
                ),
            );
        }
        for id in JointId::ALL {
            let jp = frame.joints.get(id);
            if !(jp.position.is_finite() && jp.forward.is_finite()) {
                return fail(
                    "joints",
                    format!("frame {fi}: joint {} is non-finite", id.name()),
                );
            }
            if !jp.forward.is_unit() {
                return fail(
                    "joints",
                    format!(
                        "frame {fi}: joint {} forward norm {} is not a unit vector",
                        id.name(),
                        jp.forward.norm()
                    ),
                );
            }
        }
        if fi > 0 {
            let dt = frame.t - seg.frames[fi - 1].t;
            if dt < 0.0 {
                return fail("t", format!("frame {fi}: timestamps decrease ({dt})"));
            }
            if (dt - dt_nominal).abs() > FRAME_SPACING_TOL * dt_nominal {
                return fail(
                    "t",
                    format!(
                        "frame {fi}: spacing {dt:.6}s deviates more than {:.0}% from nominal {dt_nominal:.6}s",
                        FRAME_SPACING_TOL * 100.0
                    ),
                );
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Splitting
// ---------------------------------------------------------------------------

/// Partitions segments by subject id. A segment goes to the train output if
/// its subject is in `train_subjects`, to the test output if in
/// `test_subjects`, and is dropped otherwise. The goal set is shared.
pub fn split_by_subject(
    d: &Dataset,
    train_subjects: &BTreeSet<String>,
    test_subjects: &BTreeSet<String>,
) -> Result<(Dataset, Dataset)> {
    let overlap: Vec<&String> = train_subjects.intersection(test_subjects).collect();
    if !overlap.is_empty() {
        return Err(Error::Config(format!(
            "train and test subject sets overlap: {:?}",
            overlap
        )));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for seg in &d.segments {
        if train_subjects.contains(&seg.subject_id) {
            train.push(seg.clone());
        } else if test_subjects.contains(&seg.subject_id) {
            test.push(seg.clone());
        }
    }
    Ok((
        Dataset {
            goal_set: d.goal_set.clone(),
            segments: train,
        },
        Dataset {
            goal_set: d.goal_set.clone(),
            segments: test,
        },
    ))
}

/// Convenience for building subject sets from string slices.
pub fn subject_set(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|s| s.to_string()).collect()
}
