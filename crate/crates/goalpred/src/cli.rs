//! Command-line entry point: `generate`, `train`, `predict`, `baselines`,
//! `correlate` and `eval` subcommands. The binary in `src/main.rs` is a thin
//! shim over [`run`]; all logic lives here so the examples and tests can
//! drive the same paths.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::datamodel::{load_dataset, split_by_subject, Dataset};
use crate::ensemble::{DecisionRule, EnhancedConfig, GoalClassifier, VariantName, VariantSpec};
use crate::error::{Error, Result};
use crate::experiments::{
    baseline_traces, mogaze_reference_aucs, run_baselines, run_macro, run_no_gaze, run_variants,
    train_variant, variant_traces, ExperimentReport, RunConfig,
};
use crate::features::{extract_features, FeatureChannel, FeatureConfig, GazeMetric};
use crate::lstm::{load_model, save_model, ModelFile, NegativeSampling, TrainConfig};
use crate::metrics::{EvalConfig, PredictionTrace};
use crate::selection::correlation_matrix;
use crate::synthgen::{generate, GenConfig};

const EXIT_CODES_HELP: &str = "EXIT CODES:
  0  success
  2  usage or configuration error
  3  I/O error (missing or unreadable file)
  4  malformed input or model file
  5  data invariant violation
  6  numeric failure during training or evaluation
";

/// Goal prediction from human motion and gaze.
#[derive(Parser, Debug)]
#[command(name = "goalpred", version, about, after_help = EXIT_CODES_HELP)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic dataset and write train/test splits.
    Generate(GenerateArgs),
    /// Train a model variant on a dataset file.
    Train(TrainArgs),
    /// Run a trained model over a dataset and write prediction traces.
    Predict(PredictArgs),
    /// Evaluate single-cue baselines (shorthand for `eval --suite baselines`).
    Baselines(BaselinesArgs),
    /// Compute the channel correlation matrix (and optional feature dumps).
    Correlate(CorrelateArgs),
    /// Run an experiment suite and write summary.json plus curve CSVs.
    Eval(EvalArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Output directory for train.jsonl and test.jsonl.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Total segments across all subjects.
    #[arg(long, default_value_t = 100)]
    segments: usize,
    #[arg(long, default_value_t = 10)]
    goals: usize,
    #[arg(long, default_value_t = 3)]
    macros: usize,
    #[arg(long, default_value_t = 3.0)]
    duration_min: f64,
    #[arg(long, default_value_t = 5.0)]
    duration_max: f64,
    #[arg(long, default_value_t = 120.0)]
    frame_rate: f64,
    #[arg(long, default_value_t = 1.2)]
    walk_speed: f64,
    #[arg(long, default_value_t = 0.005)]
    position_noise: f64,
    /// Per-frame probability that the gaze fixates the true goal.
    #[arg(long, default_value_t = 0.7)]
    fixation_prob: f64,
    /// Wander cone half-angle, radians.
    #[arg(long, default_value_t = 0.35)]
    wander_cone: f64,
    /// Comma-separated subject ids.
    #[arg(long, default_value = "p1,p2,p3,p4,p5,p6")]
    subjects: String,
    /// Subjects routed to train.jsonl.
    #[arg(long, default_value = "p1,p2,p3,p4")]
    train_subjects: String,
    /// Subjects routed to test.jsonl.
    #[arg(long, default_value = "p5,p6")]
    test_subjects: String,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Training dataset (`.jsonl` may be omitted).
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = VariantArg::LstmBuff)]
    variant: VariantArg,
    /// Output directory for model.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    #[arg(long, default_value_t = 5)]
    batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    learning_rate: f64,
    /// Override the variant's hidden unit count.
    #[arg(long)]
    hidden_units: Option<usize>,
    /// Override the variant's inference buffer length.
    #[arg(long)]
    buffer_len: Option<usize>,
    #[arg(long, default_value = "all")]
    negative_sampling: String,
    /// Buffered variants: windows sampled per (segment, goal) pair.
    #[arg(long, default_value_t = 4)]
    windows_per_segment: usize,
    /// Override the variant's channel list (comma-separated).
    #[arg(long)]
    channels: Option<String>,
    #[arg(long, default_value = "ray")]
    gaze_metric: String,
    /// Fixation threshold for cumulative gaze, meters.
    #[arg(long, default_value_t = 0.1)]
    fixation_threshold: f64,
}

#[derive(Args, Debug)]
struct PredictArgs {
    /// Model file written by `train`.
    #[arg(long)]
    model: PathBuf,
    /// Dataset to predict on (`.jsonl` may be omitted).
    #[arg(long)]
    data: PathBuf,
    /// Output directory for traces.csv.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    stride: usize,
}

#[derive(Args, Debug)]
struct BaselinesArgs {
    /// Dataset to evaluate (`.jsonl` may be omitted).
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Comma-separated channels (defaults to all sixteen).
    #[arg(long)]
    channels: Option<String>,
    #[arg(long, default_value_t = 3.0)]
    window: f64,
    #[arg(long, default_value_t = 10)]
    stride: usize,
    #[arg(long, default_value = "ray")]
    gaze_metric: String,
    #[arg(long, default_value_t = 0.1)]
    fixation_threshold: f64,
}

#[derive(Args, Debug)]
struct CorrelateArgs {
    /// Dataset to analyze (`.jsonl` may be omitted).
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Comma-separated channels (defaults to all sixteen).
    #[arg(long)]
    channels: Option<String>,
    #[arg(long, default_value = "ray")]
    gaze_metric: String,
    #[arg(long, default_value_t = 0.1)]
    fixation_threshold: f64,
    /// Also dump per-goal feature CSVs for this segment index.
    #[arg(long)]
    dump_segment: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum SuiteArg {
    Baselines,
    Variants,
    Macro,
    Nogaze,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
#[value(rename_all = "snake_case")]
enum VariantArg {
    Lstm,
    LstmSelect,
    LstmBuff,
    Enhanced,
    NoGaze,
}

impl VariantArg {
    fn to_name(self) -> VariantName {
        match self {
            VariantArg::Lstm => VariantName::Lstm,
            VariantArg::LstmSelect => VariantName::LstmSelect,
            VariantArg::LstmBuff => VariantName::LstmBuff,
            VariantArg::Enhanced => VariantName::Enhanced,
            VariantArg::NoGaze => VariantName::NoGaze,
        }
    }
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long, value_enum)]
    suite: SuiteArg,
    /// Test dataset (`.jsonl` may be omitted).
    #[arg(long)]
    test: PathBuf,
    /// Training dataset; required for the variants, macro and nogaze suites.
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    #[arg(long, default_value_t = 5)]
    batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    learning_rate: f64,
    #[arg(long, default_value_t = 4)]
    windows_per_segment: usize,
    /// Variant roster for the variants suite (comma-separated names).
    #[arg(long, default_value = "lstm,lstm_select,lstm_buff,enhanced")]
    roster: String,
    #[arg(long, default_value_t = 3.0)]
    window: f64,
    #[arg(long, default_value_t = 10)]
    stride: usize,
}

/// Parses argv and runs; returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}: {e}", error_category(&e));
            exit_code(&e)
        }
    }
}

fn error_category(e: &Error) -> &'static str {
    match e {
        Error::Io { .. } => "io",
        Error::Parse { .. } => "parse",
        Error::Model(_) => "model",
        Error::Segment { .. } | Error::Invalid(_) => "data",
        Error::Config(_) => "config",
        Error::Numeric(_) => "numeric",
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        Error::Io { .. } => 3,
        Error::Parse { .. } | Error::Model(_) => 4,
        Error::Segment { .. } | Error::Invalid(_) => 5,
        Error::Numeric(_) => 6,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Baselines(a) => cmd_baselines(a),
        Command::Correlate(a) => cmd_correlate(a),
        Command::Eval(a) => cmd_eval(a),
    }
}

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

fn split_csv(s: &str) -> Vec<String> {
    s.split(',')
        .map(|p| p.trim().to_string())
        .filter(|p| !p.is_empty())
        .collect()
}

fn parse_channels(s: &str) -> Result<Vec<FeatureChannel>> {
    split_csv(s).iter().map(|name| name.parse()).collect()
}

/// Accepts either the exact path or the path with `.jsonl` appended, so
/// `--data d/train` finds `d/train.jsonl`.
fn resolve_dataset_path(path: &Path) -> PathBuf {
    if path.exists() {
        return path.to_path_buf();
    }
    let with_ext = path.with_extension("jsonl");
    if with_ext.exists() {
        return with_ext;
    }
    path.to_path_buf()
}

fn load_data(path: &Path) -> Result<Dataset> {
    load_dataset(&resolve_dataset_path(path))
}

fn ensure_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn curve_csv(curve: &[f64], frame_rate_hz: f64) -> String {
    let mut out = String::from("offset_s,accuracy\n");
    for (i, v) in curve.iter().enumerate() {
        out.push_str(&format!("{:.6},{v:.6}\n", (i + 1) as f64 / frame_rate_hz));
    }
    out
}

/// summary.json plus one curve CSV per method, and a combined curve.csv.
fn write_report(report: &ExperimentReport, eval: &EvalConfig, out: &Path) -> Result<()> {
    ensure_out_dir(out)?;
    let mut summary = serde_json::Map::new();
    let mut methods = serde_json::Map::new();
    for (name, m) in &report.methods {
        let mut entry = serde_json::Map::new();
        entry.insert("auc".into(), serde_json::json!(m.auc));
        entry.insert(
            "curve_csv".into(),
            serde_json::json!(format!("{name}_curve.csv")),
        );
        methods.insert(name.clone(), serde_json::Value::Object(entry));
        write_text(
            &out.join(format!("{name}_curve.csv")),
            &curve_csv(&m.curve, eval.frame_rate_hz),
        )?;
    }
    summary.insert("methods".into(), serde_json::Value::Object(methods));
    summary.insert(
        "fingerprint".into(),
        serde_json::to_value(&report.fingerprint).expect("fingerprint serializes"),
    );
    let reference: serde_json::Map<String, serde_json::Value> = mogaze_reference_aucs()
        .iter()
        .map(|(k, v)| (k.to_string(), serde_json::json!(v)))
        .collect();
    summary.insert(
        "reference_mogaze".into(),
        serde_json::Value::Object(reference),
    );

    let text = serde_json::to_string_pretty(&serde_json::Value::Object(summary))
        .expect("summary serializes");
    write_text(&out.join("summary.json"), &format!("{text}\n"))?;

    // Wide-format curve.csv: one column per method.
    let names: Vec<&String> = report.methods.keys().collect();
    let len = eval.window_frames();
    let mut wide = String::from("offset_s");
    for n in &names {
        wide.push(',');
        wide.push_str(n);
    }
    wide.push('\n');
    for i in 0..len {
        wide.push_str(&format!("{:.6}", (i + 1) as f64 / eval.frame_rate_hz));
        for n in &names {
            wide.push_str(&format!(",{:.6}", report.methods[*n].curve[i]));
        }
        wide.push('\n');
    }
    write_text(&out.join("curve.csv"), &wide)?;

    for (name, m) in &report.methods {
        println!("{name}: auc {:.2}", m.auc);
    }
    println!("wrote {}", out.join("summary.json").display());
    Ok(())
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let cfg = GenConfig {
        n_goals: a.goals,
        n_macros: a.macros,
        segments: a.segments,
        duration_s: (a.duration_min, a.duration_max),
        frame_rate_hz: a.frame_rate,
        walk_speed_mps: a.walk_speed,
        position_noise_m: a.position_noise,
        gaze_fixation_prob: a.fixation_prob,
        gaze_wander_cone_rad: a.wander_cone,
        subjects: split_csv(&a.subjects),
        seed: a.seed,
    };
    let dataset = generate(&cfg)?;
    let train_subjects = split_csv(&a.train_subjects).into_iter().collect();
    let test_subjects = split_csv(&a.test_subjects).into_iter().collect();
    let (train, test) = split_by_subject(&dataset, &train_subjects, &test_subjects)?;

    ensure_out_dir(&a.out)?;
    let train_path = a.out.join("train.jsonl");
    let test_path = a.out.join("test.jsonl");
    train.save(&train_path)?;
    test.save(&test_path)?;
    println!(
        "generated {} segments ({} goals, {} macros): {} train -> {}, {} test -> {}",
        dataset.segments.len(),
        dataset.goal_set.len(),
        a.macros,
        train.segments.len(),
        train_path.display(),
        test.segments.len(),
        test_path.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)] // one parameter per CLI flag
fn build_run_config(
    seed: u64,
    epochs: usize,
    batch_size: usize,
    learning_rate: f64,
    windows_per_segment: usize,
    window_s: f64,
    stride: usize,
    frame_rate_hz: f64,
) -> RunConfig {
    RunConfig {
        train: TrainConfig {
            epochs,
            batch_size,
            learning_rate,
            seed,
            windows_per_segment,
            ..TrainConfig::default()
        },
        eval: EvalConfig {
            window_s,
            stride_frames: stride,
            frame_rate_hz,
        },
        ..RunConfig::default()
    }
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let data = load_data(&a.data)?;
    let mut spec = VariantSpec::of(a.variant.to_name());
    if let Some(h) = a.hidden_units {
        spec.hidden_units = h;
    }
    if let Some(b) = a.buffer_len {
        spec.buffer_len = Some(b);
    }
    if let Some(ch) = &a.channels {
        spec.channels = parse_channels(ch)?;
    }
    spec.validate()?;

    let mut cfg = build_run_config(
        a.seed,
        a.epochs,
        a.batch_size,
        a.learning_rate,
        a.windows_per_segment,
        3.0,
        10,
        data.frame_rate_hz(),
    );
    cfg.train.negative_sampling = a.negative_sampling.parse::<NegativeSampling>()?;
    cfg.gaze_metric = a.gaze_metric.parse::<GazeMetric>()?;
    cfg.gaze_fix_threshold_m = a.fixation_threshold;

    let tv = train_variant(&data, &spec, &cfg)?;
    let mut model = ModelFile::new(
        tv.classifier.network,
        tv.classifier.features.clone(),
        tv.classifier.norm.clone(),
        tv.classifier.params.clone(),
    );
    model.variant = Some(tv.spec.name.as_str().to_string());
    model.buffer_len = tv.spec.buffer_len;
    if let Some(e) = tv.spec.enhanced {
        model.score_threshold = Some(e.score_threshold);
        model.gaze_threshold_m = Some(e.gaze_threshold_m);
    }

    ensure_out_dir(&a.out)?;
    let path = a.out.join("model.json");
    save_model(&model, &path)?;
    println!(
        "trained {} on {} segments; model -> {}",
        tv.spec.name,
        data.segments.len(),
        path.display()
    );
    Ok(())
}

fn cmd_predict(a: PredictArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let data = load_data(&a.data)?;
    let clf = GoalClassifier::from_model_file(&model);
    let rule = match (model.score_threshold, model.gaze_threshold_m) {
        (Some(s), Some(g)) => DecisionRule::Enhanced(EnhancedConfig {
            score_threshold: s,
            gaze_threshold_m: g,
        }),
        _ => DecisionRule::Argmax,
    };
    let eval = EvalConfig {
        stride_frames: a.stride,
        frame_rate_hz: data.frame_rate_hz(),
        ..EvalConfig::default()
    };

    let mut traces: Vec<PredictionTrace> = Vec::with_capacity(data.segments.len());
    for seg in &data.segments {
        traces.push(crate::ensemble::trace_segment(
            seg,
            &data.goal_set,
            &clf,
            model.buffer_len,
            rule,
            &eval,
        )?);
    }

    ensure_out_dir(&a.out)?;
    let mut csv = String::from("segment,frame_index");
    for g in data.goal_set.goals() {
        csv.push_str(&format!(",score_{}", g.id));
    }
    csv.push_str(",chosen,truth\n");
    for (si, trace) in traces.iter().enumerate() {
        for step in &trace.steps {
            csv.push_str(&format!("{si},{}", step.frame_index));
            for s in &step.scores {
                csv.push_str(&format!(",{s:.6}"));
            }
            csv.push_str(&format!(",{},{}\n", step.chosen, trace.truth));
        }
    }
    let path = a.out.join("traces.csv");
    write_text(&path, &csv)?;
    println!("wrote {} traces -> {}", traces.len(), path.display());
    Ok(())
}

fn cmd_baselines(a: BaselinesArgs) -> Result<()> {
    let data = load_data(&a.data)?;
    let channels = match &a.channels {
        Some(s) => parse_channels(s)?,
        None => FeatureChannel::ALL.to_vec(),
    };
    let mut cfg = build_run_config(0, 1, 1, 1e-3, 1, a.window, a.stride, data.frame_rate_hz());
    cfg.gaze_metric = a.gaze_metric.parse::<GazeMetric>()?;
    cfg.gaze_fix_threshold_m = a.fixation_threshold;
    let report = run_baselines(&data, &channels, &cfg)?;
    write_report(&report, &cfg.eval, &a.out)
}

fn cmd_correlate(a: CorrelateArgs) -> Result<()> {
    let data = load_data(&a.data)?;
    let channels = match &a.channels {
        Some(s) => parse_channels(s)?,
        None => FeatureChannel::ALL.to_vec(),
    };
    let fc = FeatureConfig {
        channels,
        gaze_fix_threshold_m: a.fixation_threshold,
        gaze_metric: a.gaze_metric.parse::<GazeMetric>()?,
    };
    fc.validate()?;
    let matrix = correlation_matrix(&data, &fc)?;
    ensure_out_dir(&a.out)?;
    let path = a.out.join("correlation.csv");
    write_text(&path, &matrix.to_csv())?;
    println!("wrote {}", path.display());

    if let Some(idx) = a.dump_segment {
        let seg = data.segments.get(idx).ok_or_else(|| {
            Error::Config(format!(
                "segment index {idx} out of range ({} segments)",
                data.segments.len()
            ))
        })?;
        let mut csv = String::from("t,goal_id");
        for c in &fc.channels {
            csv.push(',');
            csv.push_str(c.name());
        }
        csv.push('\n');
        for goal in data.goal_set.goals() {
            let m = extract_features(seg, goal, &fc)?;
            for (fi, fr) in seg.frames.iter().enumerate() {
                csv.push_str(&format!("{:.6},{}", fr.t, goal.id));
                for ci in 0..m.cols() {
                    csv.push_str(&format!(",{:.6}", m.at(fi, ci)));
                }
                csv.push('\n');
            }
        }
        let fpath = a.out.join(format!("features_seg{idx}.csv"));
        write_text(&fpath, &csv)?;
        println!("wrote {}", fpath.display());
    }
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let test = load_data(&a.test)?;
    let cfg = build_run_config(
        a.seed,
        a.epochs,
        a.batch_size,
        a.learning_rate,
        a.windows_per_segment,
        a.window,
        a.stride,
        test.frame_rate_hz(),
    );
    let need_train = |p: &Option<PathBuf>| -> Result<Dataset> {
        match p {
            Some(path) => load_data(path),
            None => Err(Error::Config("this suite requires --train".into())),
        }
    };

    let report = match a.suite {
        SuiteArg::Baselines => run_baselines(&test, &FeatureChannel::ALL, &cfg)?,
        SuiteArg::Variants => {
            let train_set = need_train(&a.train)?;
            let roster: Vec<VariantSpec> = split_csv(&a.roster)
                .iter()
                .map(|n| n.parse::<VariantName>().map(VariantSpec::of))
                .collect::<Result<_>>()?;
            run_variants(&train_set, &test, &roster, &cfg)?
        }
        SuiteArg::Macro => {
            let train_set = need_train(&a.train)?;
            let tv = train_variant(&train_set, &VariantSpec::lstm_buff(), &cfg)?;
            let mut traces = BTreeMap::new();
            traces.insert("lstm_buff".to_string(), variant_traces(&test, &tv, &cfg)?);
            traces.insert(
                "gaze".to_string(),
                baseline_traces(&test, FeatureChannel::Gaze, &cfg)?,
            );
            run_macro(&test, &traces, &cfg)?
        }
        SuiteArg::Nogaze => {
            let train_set = need_train(&a.train)?;
            run_no_gaze(&train_set, &test, &cfg)?
        }
    };
    write_report(&report, &cfg.eval, &a.out)
}
