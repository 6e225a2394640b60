//! End-to-end tests of the `goalpred` binary: exit codes, help coverage and
//! the full generate -> train -> predict -> eval pipeline on a tiny dataset.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_goalpred"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn assert_ok(out: &Output, ctx: &str) {
    assert!(
        out.status.success(),
        "{ctx} failed (code {:?}): {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn help_lists_every_flag_per_subcommand() {
    let expectations: &[(&str, &[&str])] = &[
        (
            "generate",
            &[
                "--out",
                "--seed",
                "--segments",
                "--goals",
                "--macros",
                "--duration-min",
                "--duration-max",
                "--frame-rate",
                "--walk-speed",
                "--position-noise",
                "--fixation-prob",
                "--wander-cone",
                "--subjects",
                "--train-subjects",
                "--test-subjects",
            ],
        ),
        (
            "train",
            &[
                "--data",
                "--variant",
                "--out",
                "--seed",
                "--epochs",
                "--batch-size",
                "--learning-rate",
                "--hidden-units",
                "--buffer-len",
                "--negative-sampling",
                "--windows-per-segment",
                "--channels",
                "--gaze-metric",
                "--fixation-threshold",
            ],
        ),
        ("predict", &["--model", "--data", "--out", "--stride"]),
        (
            "baselines",
            &[
                "--data",
                "--out",
                "--channels",
                "--window",
                "--stride",
                "--gaze-metric",
                "--fixation-threshold",
            ],
        ),
        (
            "correlate",
            &[
                "--data",
                "--out",
                "--channels",
                "--gaze-metric",
                "--fixation-threshold",
                "--dump-segment",
            ],
        ),
        (
            "eval",
            &[
                "--suite",
                "--test",
                "--train",
                "--out",
                "--seed",
                "--epochs",
                "--batch-size",
                "--learning-rate",
                "--windows-per-segment",
                "--roster",
                "--window",
                "--stride",
            ],
        ),
    ];
    for (sub, flags) in expectations {
        let out = run(&[sub, "--help"]);
        assert_ok(&out, &format!("{sub} --help"));
        let text = String::from_utf8_lossy(&out.stdout);
        for flag in *flags {
            assert!(
                text.contains(flag),
                "`{sub} --help` does not document {flag}"
            );
        }
    }
    // Exit codes are documented on the top-level help.
    let out = run(&["--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for needle in [
        "EXIT CODES",
        "generate",
        "train",
        "predict",
        "baselines",
        "correlate",
        "eval",
    ] {
        assert!(text.contains(needle), "top-level help missing {needle}");
    }
}

#[test]
fn usage_errors_exit_2() {
    // Missing required flag.
    let out = run(&["train"]);
    assert_eq!(out.status.code(), Some(2));
    // Unknown flag.
    let out = run(&["generate", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    // Unknown subcommand.
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_input_file_exits_3_with_one_line_error() {
    let out = run(&[
        "baselines",
        "--data",
        "/nonexistent/ds.jsonl",
        "--out",
        "/tmp",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    let lines: Vec<&str> = err.trim().lines().collect();
    assert_eq!(lines.len(), 1, "expected a one-line error, got: {err}");
    assert!(lines[0].starts_with("error: io:"), "got: {err}");
}

#[test]
fn malformed_dataset_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsonl");
    std::fs::write(&path, "this is not a dataset\n").unwrap();
    let out = run(&[
        "baselines",
        "--data",
        path.to_str().unwrap(),
        "--out",
        "/tmp",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: parse:"));
}

#[test]
fn full_pipeline_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();

    let out = run(&[
        "generate",
        "--seed",
        "7",
        "--segments",
        "24",
        "--goals",
        "4",
        "--duration-min",
        "1.0",
        "--duration-max",
        "1.5",
        "--out",
        d,
    ]);
    assert_ok(&out, "generate");
    assert!(dir.path().join("train.jsonl").exists());
    assert!(dir.path().join("test.jsonl").exists());

    // The documented shorthand `--data <dir>/train` (no extension) works.
    let out = run(&[
        "train",
        "--data",
        &format!("{d}/train"),
        "--variant",
        "lstm_buff",
        "--epochs",
        "1",
        "--out",
        d,
    ]);
    assert_ok(&out, "train");
    let model = dir.path().join("model.json");
    assert!(model.exists(), "train must write model.json");

    let out = run(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--data",
        &format!("{d}/test"),
        "--out",
        d,
    ]);
    assert_ok(&out, "predict");
    let traces = std::fs::read_to_string(dir.path().join("traces.csv")).unwrap();
    let header = traces.lines().next().unwrap();
    assert!(header.starts_with("segment,frame_index,score_"));
    assert!(header.ends_with("chosen,truth"));
    assert!(
        traces.lines().count() > 1,
        "traces.csv must contain prediction records"
    );

    let eval_dir = dir.path().join("eval");
    let out = run(&[
        "eval",
        "--suite",
        "variants",
        "--roster",
        "lstm_buff",
        "--train",
        &format!("{d}/train"),
        "--test",
        &format!("{d}/test"),
        "--epochs",
        "1",
        "--out",
        eval_dir.to_str().unwrap(),
    ]);
    assert_ok(&out, "eval");
    check_summary(&eval_dir, &["gaze", "lstm_buff"]);

    let out = run(&[
        "correlate",
        "--data",
        &format!("{d}/test"),
        "--channels",
        "gaze,hand_euc,head_ori",
        "--dump-segment",
        "0",
        "--out",
        d,
    ]);
    assert_ok(&out, "correlate");
    let corr = std::fs::read_to_string(dir.path().join("correlation.csv")).unwrap();
    assert!(corr.starts_with("channel,gaze,hand_euc,head_ori"));
    let feats = std::fs::read_to_string(dir.path().join("features_seg0.csv")).unwrap();
    assert!(feats.starts_with("t,goal_id,gaze,hand_euc,head_ori"));

    let base_dir = dir.path().join("base");
    let out = run(&[
        "baselines",
        "--data",
        &format!("{d}/test"),
        "--channels",
        "gaze,hand_euc",
        "--out",
        base_dir.to_str().unwrap(),
    ]);
    assert_ok(&out, "baselines");
    check_summary(&base_dir, &["gaze", "hand_euc"]);
}

/// summary.json must contain an `auc` field for every method, plus the
/// fingerprint and the clearly labeled reference table.
fn check_summary(dir: &Path, methods: &[&str]) {
    let text = std::fs::read_to_string(dir.join("summary.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for m in methods {
        let auc = v["methods"][m]["auc"].as_f64();
        assert!(auc.is_some(), "summary.json missing auc for {m}: {text}");
        let curve_name = v["methods"][m]["curve_csv"].as_str().unwrap();
        assert!(dir.join(curve_name).exists(), "curve csv for {m} missing");
    }
    assert!(v["fingerprint"]["dataset_hash"].is_string());
    assert!(v["reference_mogaze"]["gaze"].as_f64().is_some());
    assert!(dir.join("curve.csv").exists(), "combined curve.csv missing");
    let curve = std::fs::read_to_string(dir.join("curve.csv")).unwrap();
    assert!(curve.starts_with("offset_s,"));
}
