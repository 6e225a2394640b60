//! Deterministic synthetic scenario generator.
//!
//! Produces labeled pick segments at desk scale: goals are clustered on a few
//! macro locations, a subject walks toward the drawn goal, the right hand
//! converges onto it over the final second, and the gaze fixates the true
//! goal with a configurable per-frame probability. When the gaze wanders it
//! looks at a uniformly drawn decoy object (within a small cone), so at
//! fixation probability 0 the gaze cue degrades to a uniform guesser by
//! construction. The left hand is generated uninformative.
//!
//! Everything is drawn from one seeded stream; the same config yields a
//! byte-identical dataset file.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::datamodel::{Dataset, Frame, Goal, GoalSet, JointPose, Joints, Segment, Vec3};
use crate::error::{Error, Result};

/// Generator parameters. Defaults reproduce the informative-but-imperfect
/// regime used throughout the test suite.
#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub n_goals: usize,
    pub n_macros: usize,
    pub segments: usize,
    /// Segment duration range, seconds (uniform draw).
    pub duration_s: (f64, f64),
    pub frame_rate_hz: f64,
    pub walk_speed_mps: f64,
    /// Per-frame Gaussian jitter on body joint positions, meters.
    pub position_noise_m: f64,
    /// Probability per frame that the gaze ray points exactly at the true goal.
    pub gaze_fixation_prob: f64,
    /// Cone half-angle around the decoy direction for wandering gaze, radians.
    pub gaze_wander_cone_rad: f64,
    pub subjects: Vec<String>,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n_goals: 10,
            n_macros: 3,
            segments: 100,
            duration_s: (3.0, 5.0),
            frame_rate_hz: 120.0,
            walk_speed_mps: 1.2,
            position_noise_m: 0.005,
            gaze_fixation_prob: 0.7,
            gaze_wander_cone_rad: 0.35,
            subjects: (1..=6).map(|i| format!("p{i}")).collect(),
            seed: 7,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_goals < 2 {
            return Err(Error::Config(format!(
                "n_goals must be >= 2, got {}",
                self.n_goals
            )));
        }
        if self.n_macros == 0 || self.n_macros > self.n_goals {
            return Err(Error::Config(format!(
                "n_macros must be in 1..=n_goals, got {}",
                self.n_macros
            )));
        }
        if !(self.duration_s.0 > 0.0 && self.duration_s.1 >= self.duration_s.0) {
            return Err(Error::Config(format!(
                "duration range must satisfy 0 < min <= max, got {:?}",
                self.duration_s
            )));
        }
        if !(self.frame_rate_hz > 0.0 && self.walk_speed_mps > 0.0) {
            return Err(Error::Config(
                "frame rate and walk speed must be > 0".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.gaze_fixation_prob) {
            return Err(Error::Config(format!(
                "gaze_fixation_prob must be in [0, 1], got {}",
                self.gaze_fixation_prob
            )));
        }
        if self.position_noise_m < 0.0 || self.gaze_wander_cone_rad < 0.0 {
            return Err(Error::Config(
                "noise and cone parameters must be >= 0".into(),
            ));
        }
        if self.subjects.is_empty() {
            return Err(Error::Config("at least one subject id is required".into()));
        }
        Ok(())
    }
}

// Scene constants. The macro ring is sized so clusters are well separated
// while goals within a cluster stay close enough to confuse orientation cues.
const MACRO_RING_RADIUS: f64 = 2.0;
const GOAL_HEIGHT: f64 = 0.9;
const GOAL_HEIGHT_JITTER: f64 = 0.2;
const CLUSTER_RADIUS: f64 = 0.45;
const MIN_GOAL_GAP: f64 = 0.12;
const LAYOUT_ATTEMPTS: usize = 16;
const PLACE_TRIES: usize = 200;

const PELVIS_Z: f64 = 1.0;
const TORSO_DZ: f64 = 0.25;
const HEAD_DZ: f64 = 0.6;
const SHOULDER_DZ: f64 = 0.45;
const SHOULDER_SIDE: f64 = 0.2;
const HAND_SIDE: f64 = 0.28;
const HAND_DZ: f64 = -0.05;
const STAND_OFF: f64 = 0.45;
/// The hand stops this far short of the goal center, keeping orientation
/// cues well defined at the grasp.
const HAND_FINAL_OFF: f64 = 0.006;
const REACH_MAX_S: f64 = 1.0;

const HEAD_ORI_NOISE: f64 = 0.35;
const TORSO_ORI_NOISE: f64 = 0.3;
const SHOULDER_ORI_NOISE: f64 = 0.35;
const HAND_ORI_NOISE: f64 = 0.25;
const HEAD_GOAL_BLEND: f64 = 0.5;
const LEFT_HAND_WANDER: f64 = 0.25;

fn normal3(rng: &mut ChaCha8Rng) -> Vec3 {
    Vec3::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    )
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        if let Some(u) = normal3(rng).normalized() {
            return u;
        }
    }
}

/// Unit vector near `axis`, Gaussian angular noise of scale `sigma`.
fn perturb(axis: Vec3, sigma: f64, rng: &mut ChaCha8Rng) -> Vec3 {
    (axis + normal3(rng).scale(sigma))
        .normalized()
        .unwrap_or(axis)
}

fn blend(a: Vec3, b: Vec3, toward_b: f64) -> Vec3 {
    (a.scale(1.0 - toward_b) + b.scale(toward_b))
        .normalized()
        .unwrap_or(a)
}

/// Uniform direction within the cone of half-angle `half_angle` around `axis`.
fn cone_sample(axis: Vec3, half_angle: f64, rng: &mut ChaCha8Rng) -> Vec3 {
    if half_angle <= 0.0 {
        return axis;
    }
    let cos_min = half_angle.min(std::f64::consts::PI).cos();
    let cos_t = 1.0 - rng.random_range(0.0..1.0) * (1.0 - cos_min);
    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let phi = rng.random_range(0.0..std::f64::consts::TAU);
    // Orthonormal basis around the axis.
    let helper = if axis.x.abs() < 0.9 {
        Vec3::new(1.0, 0.0, 0.0)
    } else {
        Vec3::new(0.0, 1.0, 0.0)
    };
    let e1 = (helper - axis.scale(helper.dot(axis)))
        .normalized()
        .expect("axis basis");
    let e2 = Vec3::new(
        axis.y * e1.z - axis.z * e1.y,
        axis.z * e1.x - axis.x * e1.z,
        axis.x * e1.y - axis.y * e1.x,
    );
    (axis.scale(cos_t) + e1.scale(sin_t * phi.cos()) + e2.scale(sin_t * phi.sin()))
        .normalized()
        .expect("cone sample is unit")
}

fn place_goals(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Result<GoalSet> {
    for attempt in 0..LAYOUT_ATTEMPTS {
        match try_place_goals(cfg, rng) {
            Some(goals) => return GoalSet::new(goals),
            None => log::warn!(
                "goal layout attempt {attempt} failed: {} goals at min gap {MIN_GOAL_GAP} m \
                 do not fit {} clusters of radius {CLUSTER_RADIUS} m; regenerating",
                cfg.n_goals,
                cfg.n_macros
            ),
        }
    }
    Err(Error::Invalid(format!(
        "infeasible goal geometry after {LAYOUT_ATTEMPTS} attempts: {} goals across {} macros \
         (cluster radius {CLUSTER_RADIUS} m, min gap {MIN_GOAL_GAP} m)",
        cfg.n_goals, cfg.n_macros
    )))
}

fn try_place_goals(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Option<Vec<Goal>> {
    let mut centers = Vec::with_capacity(cfg.n_macros);
    for m in 0..cfg.n_macros {
        let ang = std::f64::consts::TAU * m as f64 / cfg.n_macros as f64;
        centers.push(Vec3::new(
            MACRO_RING_RADIUS * ang.cos(),
            MACRO_RING_RADIUS * ang.sin(),
            GOAL_HEIGHT,
        ));
    }
    let mut placed: Vec<Vec3> = Vec::with_capacity(cfg.n_goals);
    let mut goals = Vec::with_capacity(cfg.n_goals);
    for g in 0..cfg.n_goals {
        let macro_idx = g % cfg.n_macros;
        let center = centers[macro_idx];
        let mut ok = None;
        for _ in 0..PLACE_TRIES {
            let r = CLUSTER_RADIUS * rng.random_range(0.0f64..1.0).sqrt();
            let a = rng.random_range(0.0..std::f64::consts::TAU);
            let dz = rng.random_range(-GOAL_HEIGHT_JITTER..GOAL_HEIGHT_JITTER);
            let p = center + Vec3::new(r * a.cos(), r * a.sin(), dz);
            if placed.iter().all(|q| (*q - p).norm() >= MIN_GOAL_GAP) {
                ok = Some(p);
                break;
            }
        }
        let p = ok?;
        placed.push(p);
        goals.push(Goal {
            id: format!("g{g}"),
            position: p,
            macro_id: format!("m{macro_idx}"),
        });
    }
    Some(goals)
}

/// How many segments each configured subject receives (round-robin order).
pub fn subject_partition(cfg: &GenConfig) -> Vec<(String, usize)> {
    let n = cfg.subjects.len();
    cfg.subjects
        .iter()
        .enumerate()
        .map(|(idx, s)| {
            let count = cfg.segments / n + usize::from(idx < cfg.segments % n);
            (s.clone(), count)
        })
        .collect()
}

/// Generates a fully validated dataset, deterministically from `cfg.seed`.
pub fn generate(cfg: &GenConfig) -> Result<Dataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let goal_set = place_goals(cfg, &mut rng)?;

    let mut segments = Vec::with_capacity(cfg.segments);
    for i in 0..cfg.segments {
        let subject = cfg.subjects[i % cfg.subjects.len()].clone();
        segments.push(generate_segment(cfg, &goal_set, subject, &mut rng));
    }
    Dataset::new(goal_set, segments)
}

fn generate_segment(
    cfg: &GenConfig,
    goals: &GoalSet,
    subject_id: String,
    rng: &mut ChaCha8Rng,
) -> Segment {
    let duration = if cfg.duration_s.0 == cfg.duration_s.1 {
        cfg.duration_s.0
    } else {
        rng.random_range(cfg.duration_s.0..cfg.duration_s.1)
    };
    let n_frames = ((duration * cfg.frame_rate_hz).round() as usize).max(1);
    let t_last = (n_frames - 1) as f64 / cfg.frame_rate_hz;

    let goal_idx = rng.random_range(0..goals.len());
    let goal_pos = goals.get(goal_idx).position;

    // Straight walk: approach azimuth fixed per segment, stand point just
    // short of the goal, start placed so the configured speed fills the
    // walking phase exactly.
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    let walk_dir = Vec3::new(theta.cos(), theta.sin(), 0.0);
    let stand = Vec3::new(goal_pos.x, goal_pos.y, 0.0) - walk_dir.scale(STAND_OFF);
    let reach_dur = REACH_MAX_S.min(0.5 * t_last);
    let walk_dur = (t_last - reach_dur).max(0.0);
    let start = stand - walk_dir.scale(cfg.walk_speed_mps * walk_dur);
    let side = Vec3::new(walk_dir.y, -walk_dir.x, 0.0); // subject's right

    let stand_pelvis = Vec3::new(stand.x, stand.y, PELVIS_Z);
    let hand_target = goal_pos
        + (stand_pelvis - goal_pos)
            .normalized()
            .unwrap_or(Vec3::new(0.0, 0.0, 1.0))
            .scale(HAND_FINAL_OFF);

    let mut frames = Vec::with_capacity(n_frames);
    for fi in 0..n_frames {
        let t = fi as f64 / cfg.frame_rate_hz;
        let walked = t.min(walk_dur);
        let base = start + walk_dir.scale(cfg.walk_speed_mps * walked);

        let reach_u = if reach_dur > 0.0 {
            ((t - (t_last - reach_dur)) / reach_dur).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let s = reach_u * reach_u * (3.0 - 2.0 * reach_u); // smoothstep

        let jitter = |rng: &mut ChaCha8Rng| normal3(rng).scale(cfg.position_noise_m);
        let pelvis_p = Vec3::new(base.x, base.y, PELVIS_Z) + jitter(rng);
        let torso_p = pelvis_p + Vec3::new(0.0, 0.0, TORSO_DZ) + jitter(rng);
        let head_p = pelvis_p + Vec3::new(0.0, 0.0, HEAD_DZ) + jitter(rng);
        let lsh_p =
            pelvis_p + Vec3::new(0.0, 0.0, SHOULDER_DZ) - side.scale(SHOULDER_SIDE) + jitter(rng);
        let rsh_p =
            pelvis_p + Vec3::new(0.0, 0.0, SHOULDER_DZ) + side.scale(SHOULDER_SIDE) + jitter(rng);

        let hand_rest = pelvis_p + side.scale(HAND_SIDE) + Vec3::new(0.0, 0.0, HAND_DZ);
        let hand_p = hand_rest.scale(1.0 - s) + hand_target.scale(s) + jitter(rng).scale(1.0 - s);
        let lhand_p = pelvis_p - side.scale(HAND_SIDE)
            + Vec3::new(0.0, 0.0, HAND_DZ)
            + normal3(rng).scale(LEFT_HAND_WANDER);

        let goal_dir_from = |p: Vec3| (goal_pos - p).normalized().unwrap_or(walk_dir);
        let head_f = perturb(
            blend(walk_dir, goal_dir_from(head_p), HEAD_GOAL_BLEND),
            HEAD_ORI_NOISE,
            rng,
        );
        let torso_f = perturb(walk_dir, TORSO_ORI_NOISE, rng);
        let pelvis_f = perturb(walk_dir, TORSO_ORI_NOISE, rng);
        let lsh_f = perturb(walk_dir, SHOULDER_ORI_NOISE, rng);
        let rsh_f = perturb(walk_dir, SHOULDER_ORI_NOISE, rng);
        let hand_f = perturb(
            blend(walk_dir, goal_dir_from(hand_p), 0.3 + 0.7 * s),
            HAND_ORI_NOISE * (1.0 - 0.8 * s),
            rng,
        );
        let lhand_f = random_unit(rng);

        let gaze_origin = head_p;
        let gaze_dir = if rng.random_range(0.0..1.0) < cfg.gaze_fixation_prob {
            goal_dir_from(gaze_origin)
        } else {
            // Wander: look toward a uniformly drawn decoy object, smeared
            // by the wander cone.
            let decoy = goals.get(rng.random_range(0..goals.len())).position;
            let axis = (decoy - gaze_origin).normalized().unwrap_or(head_f);
            cone_sample(axis, cfg.gaze_wander_cone_rad, rng)
        };

        frames.push(Frame {
            t,
            gaze_origin,
            gaze_dir,
            joints: Joints {
                head: JointPose {
                    position: head_p,
                    forward: head_f,
                },
                torso: JointPose {
                    position: torso_p,
                    forward: torso_f,
                },
                pelvis: JointPose {
                    position: pelvis_p,
                    forward: pelvis_f,
                },
                left_hand: JointPose {
                    position: lhand_p,
                    forward: lhand_f,
                },
                right_hand: JointPose {
                    position: hand_p,
                    forward: hand_f,
                },
                left_shoulder: JointPose {
                    position: lsh_p,
                    forward: lsh_f,
                },
                right_shoulder: JointPose {
                    position: rsh_p,
                    forward: rsh_f,
                },
            },
        });
    }

    Segment {
        frames,
        frame_rate_hz: cfg.frame_rate_hz,
        picked_goal: format!("g{goal_idx}"),
        subject_id,
    }
}
