//! Acceptance suite. One test per criterion; each prints a `[PASS]`/`[SKIP]`
//! line (visible with `--nocapture`). Criteria 4 and 5 share one trained
//! synthetic run. Criterion 7 only runs when GOALPRED_MOGAZE_DATA points at a
//! converted recording in the canonical dataset format.

use std::collections::BTreeSet;
use std::sync::OnceLock;
use std::time::Instant;

use goalpred::datamodel::{load_dataset, split_by_subject, subject_set, Dataset, Vec3};
use goalpred::ensemble::{to_macro_trace, VariantSpec};
use goalpred::experiments::{run_baselines, run_no_gaze, train_variant, variant_traces, RunConfig};
use goalpred::features::{
    apply_normalizer, cumulative_gaze, direction_distance, euclidean_distance, extract_features,
    gaze_ray_distance, FeatureChannel, FeatureConfig, NormStats,
};
use goalpred::lstm::{backward, cross_entropy, forward, LstmParams, NetworkConfig};
use goalpred::metrics::{
    accuracy_curve, auc, stride_points, EvalConfig, PredictionTrace, TraceStep,
};
use goalpred::synthgen::{generate, GenConfig};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// Criterion 1: gradient oracle
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_gradient_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE97);
    let mut checked = 0usize;
    for case in 0..20 {
        let f_dim = rng.random_range(1..=5);
        let h_dim = rng.random_range(1..=6);
        let t_dim = rng.random_range(1..=8);
        let net = NetworkConfig::new(f_dim, h_dim).unwrap();
        let params = LstmParams::init(&net, &mut rng);
        let values: Vec<f64> = (0..t_dim * f_dim)
            .map(|_| rng.random_range(0.0..2.0))
            .collect();
        let x = goalpred::features::FeatureMatrix::new(
            values,
            t_dim,
            FeatureChannel::ALL[..f_dim].to_vec(),
            "g".into(),
        );
        let label = rng.random::<bool>();
        let (_, cache) = forward(&params, &x).unwrap();
        let analytic = backward(&params, &cache, label).unwrap().flatten();

        let h_step = 1e-5;
        for (idx, &analytic_g) in analytic.iter().enumerate() {
            let mut plus = params.clone();
            plus.nudge(idx, h_step);
            let (_, c1) = forward(&plus, &x).unwrap();
            let mut minus = params.clone();
            minus.nudge(idx, -h_step);
            let (_, c2) = forward(&minus, &x).unwrap();
            let numeric = (cross_entropy(&c1, label) - cross_entropy(&c2, label)) / (2.0 * h_step);
            let diff = (analytic_g - numeric).abs();
            let denom = analytic_g.abs().max(numeric.abs());
            if denom > 1e-9 {
                assert!(
                    diff / denom < 1e-4,
                    "case {case} (F={f_dim},H={h_dim},T={t_dim}) param {idx}: \
                     analytic {analytic_g} vs numeric {numeric}, rel err {}",
                    diff / denom
                );
            } else {
                assert!(
                    diff < 1e-9,
                    "case {case} param {idx}: near-zero mismatch {diff}"
                );
            }
            checked += 1;
        }
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 30,
        "gradient oracle took {elapsed:.1?} (budget 30 s)"
    );
    println!(
        "[PASS] criterion 1: BPTT gradients match central differences on 20 configs \
         ({checked} components, rel err < 1e-4) in {elapsed:.1?}"
    );
}

// ---------------------------------------------------------------------------
// Criterion 2: metric calibration
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_metric_calibration() {
    let started = Instant::now();
    let eval = EvalConfig::default();

    // All-correct 360-frame curve sums to exactly 360.
    let all_correct: Vec<PredictionTrace> = (0..5)
        .map(|_| PredictionTrace {
            n_frames: 360,
            truth: "g".into(),
            steps: stride_points(360, 10)
                .into_iter()
                .map(|k| TraceStep {
                    frame_index: k,
                    scores: vec![],
                    chosen: "g".into(),
                })
                .collect(),
        })
        .collect();
    let curve = accuracy_curve(&all_correct, &eval).unwrap();
    assert_eq!(curve.len(), 360);
    assert_eq!(auc(&curve), 360.0, "all-correct AUC must be exactly 360");

    // A seeded uniform-random predictor over 10 goals lands within 3 binomial
    // standard deviations of 360/10 = 36.
    let n_segments = 240;
    let gen = GenConfig {
        segments: n_segments,
        seed: 918,
        ..GenConfig::default()
    };
    let ds = generate(&gen).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let goal_ids: Vec<&str> = ds.goal_set.goals().iter().map(|g| g.id.as_str()).collect();
    let traces: Vec<PredictionTrace> = ds
        .segments
        .iter()
        .map(|seg| PredictionTrace {
            n_frames: seg.len(),
            truth: seg.picked_goal.clone(),
            steps: stride_points(seg.len(), eval.stride_frames)
                .into_iter()
                .map(|k| TraceStep {
                    frame_index: k,
                    scores: vec![],
                    chosen: goal_ids[rng.random_range(0..goal_ids.len())].to_string(),
                })
                .collect(),
        })
        .collect();
    let random_auc = auc(&accuracy_curve(&traces, &eval).unwrap());
    // Per segment the window holds <= ceil(360/10) + 1 held predictions of 10
    // frames each: Var <= 0.1*0.9*3700 per segment, sigma = sqrt(333)/sqrt(S).
    let sigma = (0.1 * 0.9 * 3700.0f64).sqrt() / (n_segments as f64).sqrt();
    let tol = 3.0 * sigma;
    assert!(
        (random_auc - 36.0).abs() < tol,
        "random predictor AUC {random_auc:.2} outside 36 +/- {tol:.2}"
    );

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "metric calibration took {elapsed:.1?} (budget 1 min)"
    );
    println!(
        "[PASS] criterion 2: max AUC exactly 360; random predictor AUC {random_auc:.2} \
         within 36 +/- {tol:.2} ({elapsed:.1?})"
    );
}

// ---------------------------------------------------------------------------
// Criterion 3: feature oracles
// ---------------------------------------------------------------------------

fn oracle_ray_ternary(origin: Vec3, dir: Vec3, goal: Vec3) -> f64 {
    let eval = |s: f64| (origin + dir.scale(s) - goal).norm();
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
fn criterion_3_feature_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let unit = |rng: &mut ChaCha8Rng| loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if let Some(u) = v.normalized() {
            break u;
        }
    };
    let point = |rng: &mut ChaCha8Rng| {
        Vec3::new(
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
        )
    };

    for _ in 0..1000 {
        // Euclidean: explicit coordinate arithmetic.
        let (a, b) = (point(&mut rng), point(&mut rng));
        let expect = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2)).sqrt();
        assert!((euclidean_distance(a, b) - expect).abs() < 1e-9);

        // Direction: sqrt(2 - 2 cos theta) route.
        let fwd = unit(&mut rng);
        let from = point(&mut rng);
        let goal = point(&mut rng);
        if (goal - from).norm() > 1e-6 {
            let u = (goal - from).normalized().unwrap();
            let expect = (2.0 - 2.0 * fwd.dot(u)).max(0.0).sqrt();
            assert!((direction_distance(fwd, from, goal).unwrap() - expect).abs() < 1e-9);
        }

        // Ray: ternary-search minimization over the half-line.
        let origin = point(&mut rng);
        let dir = unit(&mut rng);
        let g = point(&mut rng);
        let expect = oracle_ray_ternary(origin, dir, g);
        assert!(
            (gaze_ray_distance(origin, dir, g) - expect).abs() < 1e-9,
            "ray distance mismatch: {} vs oracle {expect}",
            gaze_ray_distance(origin, dir, g)
        );
    }

    // Cumulative gaze: quadratic recount oracle plus monotonicity.
    for _ in 0..200 {
        let n = rng.random_range(0..80);
        let dists: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.3)).collect();
        let thr = rng.random_range(0.01..0.25);
        let got = cumulative_gaze(&dists, thr);
        for t in 0..n {
            let expect = dists[..=t].iter().filter(|d| **d < thr).count() as f64;
            assert_eq!(got[t], expect);
            if t > 0 {
                assert!(got[t] >= got[t - 1]);
            }
        }
    }

    // Normalization argmin-invariance on 100 random segments.
    let cfg = FeatureConfig::reduced();
    let gen = GenConfig {
        segments: 100,
        n_goals: 5,
        seed: 77,
        duration_s: (0.4, 0.8),
        ..GenConfig::default()
    };
    let ds = generate(&gen).unwrap();
    let stats = NormStats {
        channels: cfg.channels.clone(),
        means: vec![0.9, 3.1, 0.5, 1.1, 0.7],
    };
    for seg in &ds.segments {
        let raw: Vec<_> = ds
            .goal_set
            .goals()
            .iter()
            .map(|g| extract_features(seg, g, &cfg).unwrap())
            .collect();
        let norm: Vec<_> = raw
            .iter()
            .map(|m| apply_normalizer(m, &stats).unwrap())
            .collect();
        for t in (0..seg.len()).step_by(7) {
            for c in 0..cfg.channels.len() {
                let argmin = |ms: &[goalpred::features::FeatureMatrix]| {
                    (0..ms.len()).fold(0, |best, g| {
                        if ms[g].at(t, c) < ms[best].at(t, c) {
                            g
                        } else {
                            best
                        }
                    })
                };
                assert_eq!(argmin(&raw), argmin(&norm));
            }
        }
    }

    println!(
        "[PASS] criterion 3: euclidean/direction/ray/cumulative match brute-force oracles \
         on 1000 random inputs (1e-9); normalization argmin-invariant on 100 segments"
    );
}

// ---------------------------------------------------------------------------
// Criteria 4 and 5 share one seed-fixed synthetic run.
// ---------------------------------------------------------------------------

struct SharedRun {
    gaze_auc: f64,
    hand_euc_auc: f64,
    head_ori_auc: f64,
    buff_object_auc: f64,
    buff_macro_auc: f64,
    enhanced_auc: f64,
    no_gaze_auc: f64,
    train_seconds: f64,
}

static SHARED: OnceLock<SharedRun> = OnceLock::new();

fn shared_run() -> &'static SharedRun {
    SHARED.get_or_init(|| {
        let started = Instant::now();
        // 700 segments over 7 subjects split 5/2 -> exactly 500 train, 200 test.
        let gen = GenConfig {
            segments: 700,
            subjects: (1..=7).map(|i| format!("p{i}")).collect(),
            seed: 2024,
            ..GenConfig::default()
        };
        assert_eq!(gen.n_goals, 10);
        assert_eq!(gen.n_macros, 3);
        assert_eq!(gen.gaze_fixation_prob, 0.7);
        let ds = generate(&gen).unwrap();
        let (train_set, test_set) = split_by_subject(
            &ds,
            &subject_set(&["p1", "p2", "p3", "p4", "p5"]),
            &subject_set(&["p6", "p7"]),
        )
        .unwrap();
        assert_eq!(train_set.segments.len(), 500);
        assert_eq!(test_set.segments.len(), 200);

        // LSTM Buff per the pinned hyperparameters: L=20, H=20, 5 epochs,
        // batch 5, lr 1e-3 (RunConfig defaults).
        let cfg = RunConfig::default();
        assert_eq!(cfg.train.epochs, 5);
        assert_eq!(cfg.train.batch_size, 5);
        assert_eq!(cfg.train.learning_rate, 1e-3);
        let buff_spec = VariantSpec::lstm_buff();
        assert_eq!(buff_spec.buffer_len, Some(20));
        assert_eq!(buff_spec.hidden_units, 20);

        let baselines = run_baselines(
            &test_set,
            &[
                FeatureChannel::Gaze,
                FeatureChannel::HandEuc,
                FeatureChannel::HeadOri,
            ],
            &cfg,
        )
        .unwrap();

        let buff = train_variant(&train_set, &buff_spec, &cfg).unwrap();
        let buff_traces = variant_traces(&test_set, &buff, &cfg).unwrap();
        let buff_object_auc = auc(&accuracy_curve(&buff_traces, &cfg.eval).unwrap());
        let macro_traces: Vec<_> = buff_traces
            .iter()
            .map(|t| to_macro_trace(t, &test_set.goal_set))
            .collect();
        let buff_macro_auc = auc(&accuracy_curve(&macro_traces, &cfg.eval).unwrap());

        let enhanced = train_variant(&train_set, &VariantSpec::enhanced(), &cfg).unwrap();
        let enhanced_traces = variant_traces(&test_set, &enhanced, &cfg).unwrap();
        let enhanced_auc = auc(&accuracy_curve(&enhanced_traces, &cfg.eval).unwrap());

        let no_gaze = run_no_gaze(&train_set, &test_set, &cfg).unwrap();

        SharedRun {
            gaze_auc: baselines.methods["gaze"].auc,
            hand_euc_auc: baselines.methods["hand_euc"].auc,
            head_ori_auc: baselines.methods["head_ori"].auc,
            buff_object_auc,
            buff_macro_auc,
            enhanced_auc,
            no_gaze_auc: no_gaze.methods["no_gaze"].auc,
            train_seconds: started.elapsed().as_secs_f64(),
        }
    })
}

#[test]
fn criterion_4_end_to_end_learnability() {
    let run = shared_run();
    assert!(
        run.buff_object_auc > 72.0,
        "LSTM Buff object AUC {:.2} must exceed 2x random (72)",
        run.buff_object_auc
    );
    assert!(
        run.buff_macro_auc > run.buff_object_auc,
        "macro AUC {:.2} must exceed object AUC {:.2}",
        run.buff_macro_auc,
        run.buff_object_auc
    );
    assert!(
        run.train_seconds < 600.0,
        "shared run took {:.0} s (budget 10 min)",
        run.train_seconds
    );
    println!(
        "[PASS] criterion 4: LSTM Buff object AUC {:.2} > 72; macro AUC {:.2} > object \
         (shared run {:.0} s)",
        run.buff_object_auc, run.buff_macro_auc, run.train_seconds
    );
}

#[test]
fn criterion_5_qualitative_orderings() {
    let run = shared_run();
    assert!(
        run.gaze_auc > run.hand_euc_auc,
        "gaze {:.2} must beat hand_euc {:.2}",
        run.gaze_auc,
        run.hand_euc_auc
    );
    assert!(
        run.hand_euc_auc > run.head_ori_auc,
        "hand_euc {:.2} must beat head_ori {:.2}",
        run.hand_euc_auc,
        run.head_ori_auc
    );
    assert!(
        run.enhanced_auc >= run.gaze_auc,
        "enhanced {:.2} must match or beat the gaze baseline {:.2}",
        run.enhanced_auc,
        run.gaze_auc
    );
    let best_body = run.hand_euc_auc.max(run.head_ori_auc);
    assert!(
        run.no_gaze_auc > best_body,
        "no-gaze model {:.2} must beat the best body baseline {:.2}",
        run.no_gaze_auc,
        best_body
    );
    println!(
        "[PASS] criterion 5: gaze {:.2} > hand_euc {:.2} > head_ori {:.2}; \
         enhanced {:.2} >= gaze; no_gaze {:.2} > best body baseline {:.2}",
        run.gaze_auc,
        run.hand_euc_auc,
        run.head_ori_auc,
        run.enhanced_auc,
        run.no_gaze_auc,
        best_body
    );
}

// ---------------------------------------------------------------------------
// Criterion 6: pipeline determinism (through the CLI binary)
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_pipeline_determinism() {
    let bin = env!("CARGO_BIN_EXE_goalpred");
    let root = tempfile::tempdir().unwrap();

    let run_pipeline = |tag: &str| -> (Vec<u8>, Vec<u8>) {
        let dir = root.path().join(tag);
        std::fs::create_dir_all(&dir).unwrap();
        let run = |args: &[&str]| {
            let out = std::process::Command::new(bin).args(args).output().unwrap();
            assert!(
                out.status.success(),
                "{args:?} failed: {}",
                String::from_utf8_lossy(&out.stderr)
            );
        };
        let d = dir.to_str().unwrap();
        run(&[
            "generate",
            "--seed",
            "5",
            "--segments",
            "60",
            "--goals",
            "6",
            "--out",
            d,
        ]);
        run(&[
            "train",
            "--data",
            &format!("{d}/train"),
            "--variant",
            "lstm_buff",
            "--epochs",
            "2",
            "--seed",
            "5",
            "--out",
            d,
        ]);
        run(&[
            "eval",
            "--suite",
            "baselines",
            "--test",
            &format!("{d}/test"),
            "--seed",
            "5",
            "--out",
            &format!("{d}/eval"),
        ]);
        (
            std::fs::read(dir.join("model.json")).unwrap(),
            std::fs::read(dir.join("eval/summary.json")).unwrap(),
        )
    };

    let (model_a, summary_a) = run_pipeline("a");
    let (model_b, summary_b) = run_pipeline("b");
    assert_eq!(
        model_a, model_b,
        "model files must be byte-identical across runs"
    );
    assert_eq!(
        summary_a, summary_b,
        "summary.json (AUC values) must be identical across runs"
    );
    println!(
        "[PASS] criterion 6: generate/train/eval reruns are byte-identical \
         (model {} bytes, summary {} bytes)",
        model_a.len(),
        summary_a.len()
    );
}

// ---------------------------------------------------------------------------
// Criterion 7 (optional): converted MoGaze reproduction
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_mogaze_reproduction_when_data_supplied() {
    let Some(path) = std::env::var_os("GOALPRED_MOGAZE_DATA") else {
        println!(
            "[SKIP] criterion 7: set GOALPRED_MOGAZE_DATA to a converted recording \
             (see docs/mogaze-adapter.md) to run the reproduction check"
        );
        return;
    };
    let ds: Dataset = load_dataset(std::path::Path::new(&path)).unwrap();
    let train_subjects: BTreeSet<String> =
        ["1", "2", "4", "5"].iter().map(|s| s.to_string()).collect();
    let test_subjects: BTreeSet<String> = ["6", "7"].iter().map(|s| s.to_string()).collect();
    let (train_set, test_set) = split_by_subject(&ds, &train_subjects, &test_subjects).unwrap();
    println!(
        "[REPORT] criterion 7: split {} train / {} test segments (reference: 853 / 582)",
        train_set.segments.len(),
        test_set.segments.len()
    );

    let cfg = RunConfig::default();
    let channels = [
        FeatureChannel::Gaze,
        FeatureChannel::HandEuc,
        FeatureChannel::HandOri,
        FeatureChannel::HeadOri,
        FeatureChannel::CumulativeGaze,
    ];
    let report = run_baselines(&test_set, &channels, &cfg).unwrap();
    let reference = goalpred::experiments::mogaze_reference_aucs();
    for ch in &channels {
        let got = report.methods[ch.name()].auc;
        let expect = reference.iter().find(|(n, _)| n == &ch.name()).unwrap().1;
        let dev = (got - expect).abs() / expect;
        if dev <= 0.10 {
            println!(
                "[PASS] criterion 7: {} AUC {got:.2} within 10% of {expect:.2}",
                ch.name()
            );
        } else {
            // Reported, not failed: the gaze-distance definition is ambiguous
            // in the source material (see features module docs).
            println!(
                "[WARN] criterion 7: {} AUC {got:.2} deviates {:.0}% from {expect:.2}",
                ch.name(),
                dev * 100.0
            );
        }
    }
}
