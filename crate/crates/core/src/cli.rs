//! The `mstgn` command line.
//!
//! Every subcommand that needs a network reads one run configuration
//! document, `{"model": ModelConfig, "train": TrainConfig}`, given either as a
//! preset name or as a JSON file path. `--set key=value` overrides a dotted
//! path inside that document (`train.epochs=5`, `model.layers.0.stride=2`);
//! the value is parsed as JSON and falls back to a plain string. Unknown keys
//! are rejected. The resolved document is logged to stderr before the run.
//!
//! Exit codes: 0 on success, 1 on invalid input or configuration, 2 when a
//! run fails (non-finite loss, failed gradient check, i/o trouble).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graphs::ScaleName;
use crate::model::{
    count_flops, count_params, gradient_suite, load_checkpoint, save_checkpoint, BlockKind, InputShape, ModelConfig,
    TgnModel,
};
use crate::skeleton::{load_sequence_with, synth_dataset, Dataset, Layout, Preprocess, Split, Stream, SynthConfig};
use crate::training::{ablation_run, block_rows, evaluate_fused, multiscale_rows, train, EvalOptions, TrainConfig};

/// The configuration document shared by all subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub train: TrainConfig,
}

impl RunConfig {
    /// Model presets paired with a training schedule; `desk` gets the short
    /// synthetic-data schedule.
    pub fn preset(name: &str) -> Option<RunConfig> {
        let model = ModelConfig::preset(name)?;
        let train = if name == "desk" {
            TrainConfig::desk()
        } else {
            TrainConfig::default()
        };
        Some(RunConfig { model, train })
    }

    pub fn from_json(text: &str) -> Result<RunConfig> {
        serde_json::from_str(text).map_err(|e| Error::parse(format!("run config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialize")
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.train.validate()
    }
}

/// Set `path` (dot separated, array indices allowed) inside `doc`. Only keys
/// that already exist can be set.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config(format!("override '{assignment}' is not key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    for key in path.split('.') {
        node = match node {
            Value::Object(map) => map.get_mut(key),
            Value::Array(items) => key.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| Error::config(format!("unknown config key '{path}'")))?;
    }
    *node = value;
    Ok(())
}

#[derive(Parser, Debug)]
#[command(name = "mstgn", version, about = "Multi-scale temporal graph networks for skeleton action recognition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a deterministic synthetic dataset.
    Synth(SynthArgs),
    /// Validate sequence files and optionally rewrite them preprocessed.
    Convert(ConvertArgs),
    /// Train a model and emit a run report.
    Train(TrainArgs),
    /// Evaluate one checkpoint, or fuse several.
    Eval(EvalArgs),
    /// Itemized parameter and MAC counts for a configuration.
    Count(CountArgs),
    /// Finite-difference gradient checks of every operation and a toy network.
    Gradcheck(GradcheckArgs),
    /// Train and evaluate an ablation table.
    Ablate(AblateArgs),
}

#[derive(Args, Debug, Clone)]
struct ConfigArgs {
    /// Preset name (ntu25_default, openpose18_default, desk) or JSON path.
    #[arg(long)]
    config: Option<String>,
    /// Override a config value, e.g. `--set train.epochs=5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Seed for initialization and shuffling.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated scales, e.g. `full,part,core`.
    #[arg(long)]
    scales: Option<String>,
    /// Layer block: tgn or baseline.
    #[arg(long, value_parser = parse_block)]
    block: Option<BlockKind>,
    /// Input stream: joint or bone.
    #[arg(long, value_parser = parse_stream)]
    stream: Option<Stream>,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Print exactly one JSON document on stdout.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Skeleton layout: ntu25 or openpose18.
    #[arg(long, default_value = "ntu25")]
    layout: String,
    /// Number of action classes.
    #[arg(long, default_value_t = 2)]
    classes: usize,
    /// Training clips per class.
    #[arg(long, default_value_t = 32)]
    per_class: usize,
    /// Extra held-out clips per class.
    #[arg(long, default_value_t = 0)]
    test_per_class: usize,
    /// Frames per clip.
    #[arg(long, default_value_t = 64)]
    frames: usize,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Standard deviation of per-coordinate Gaussian noise.
    #[arg(long, default_value_t = 0.01)]
    noise: f64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct ConvertArgs {
    /// Sequence JSON files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Skeleton layout: ntu25 or openpose18.
    #[arg(long, default_value = "ntu25")]
    layout: String,
    /// Replay-pad or truncate every clip to this many frames.
    #[arg(long)]
    frames: Option<usize>,
    /// Translate each clip so the centre joint of frame 0 sits at the origin.
    #[arg(long)]
    center: bool,
    /// Input stream: joint or bone.
    #[arg(long, value_parser = parse_stream, default_value = "joint")]
    stream: Stream,
    /// Directory for the rewritten files; without it files are only checked.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Dataset manifest.
    #[arg(long)]
    data: PathBuf,
    /// Write the final model checkpoint here.
    #[arg(long)]
    save: Option<PathBuf>,
    /// Write the run report JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Checkpoint files; more than one fuses their softmax scores.
    #[arg(long = "checkpoint", required = true)]
    checkpoints: Vec<PathBuf>,
    /// Fusion weight per checkpoint, in order (default 1 each).
    #[arg(long = "weight")]
    weights: Vec<f64>,
    /// Dataset manifest.
    #[arg(long)]
    data: PathBuf,
    /// Split to evaluate: train or test.
    #[arg(long, default_value = "test", value_parser = parse_split)]
    split: Split,
    /// Optional run config; its train section sets frames, centring and batch size.
    #[arg(long)]
    config: Option<String>,
    /// Override a config value, e.g. `--set train.target_frames=64`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Write the metrics JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct CountArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Temporal kernel of the GCN + TCN comparison stack.
    #[arg(long, default_value_t = 9)]
    baseline_kernel: usize,
    /// List every parameter tensor, not only the per-layer totals.
    #[arg(long)]
    tensors: bool,
    /// Write the count JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct GradcheckArgs {
    /// Number of seeds, starting at `--seed`.
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum relative error for a check to pass.
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum AblationKind {
    /// Five scale subsets with the TGN block.
    Scales,
    /// Baseline block against TGN block on the configured scales.
    Blocks,
}

#[derive(Args, Debug)]
struct AblateArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Dataset manifest; the test split is used for evaluation when present.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = AblationKind::Scales)]
    kind: AblationKind,
    /// Temporal kernel of the baseline rows.
    #[arg(long, default_value_t = 9)]
    baseline_kernel: usize,
    /// Write the table JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

fn parse_block(s: &str) -> std::result::Result<BlockKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_stream(s: &str) -> std::result::Result<Stream, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_split(s: &str) -> std::result::Result<Split, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load_document(name: &str) -> Result<Value> {
    if let Some(preset) = RunConfig::preset(name) {
        return Ok(serde_json::to_value(preset).expect("configs serialize"));
    }
    let path = Path::new(name);
    if !path.exists() {
        return Err(Error::config(format!(
            "'{name}' is neither a preset ({}) nor a config file",
            ModelConfig::PRESETS.join(", ")
        )));
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    // round-trip through the typed form so defaults are explicit and unknown keys fail
    let typed = RunConfig::from_json(&text)?;
    Ok(serde_json::to_value(typed).expect("configs serialize"))
}

fn resolve_document(name: Option<&str>, overrides: &[String]) -> Result<RunConfig> {
    let name = name.ok_or_else(|| Error::config("missing --config <preset|path>"))?;
    let mut doc = load_document(name)?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    serde_json::from_value(doc).map_err(|e| Error::config(format!("after overrides: {e}")))
}

fn resolve(args: &ConfigArgs) -> Result<RunConfig> {
    let mut cfg = resolve_document(args.config.as_deref(), &args.overrides)?;
    if let Some(seed) = args.seed {
        cfg.train.seed = seed;
    }
    if let Some(s) = &args.scales {
        cfg.model.scales = ScaleName::parse_list(s)?;
    }
    if let Some(b) = args.block {
        cfg.model.block = b;
    }
    if let Some(s) = args.stream {
        cfg.model.stream = s;
    }
    cfg.validate()?;
    log_config(&cfg);
    Ok(cfg)
}

fn log_config(cfg: &RunConfig) {
    eprintln!("resolved config: {}", serde_json::to_string(cfg).expect("configs serialize"));
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Print either the JSON document or the text rendering.
fn emit(output: &OutputArgs, doc: &Value, text: &str) {
    if output.json {
        println!("{}", serde_json::to_string_pretty(doc).expect("values serialize"));
    } else {
        print!("{text}");
    }
}

fn group_digits(n: u64) -> String {
    let s = n.to_string();
    let mut out = String::new();
    for (i, ch) in s.chars().enumerate() {
        if i > 0 && (s.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

fn cmd_synth(a: &SynthArgs) -> Result<i32> {
    let layout = Layout::builtin(&a.layout)?;
    let config = SynthConfig {
        classes: a.classes,
        per_class: a.per_class,
        test_per_class: a.test_per_class,
        frames: a.frames,
        seed: a.seed,
        noise: a.noise,
    };
    let data = synth_dataset(&config, &layout)?;
    let manifest = data.write(&a.out)?;
    let doc = json!({
        "manifest": manifest,
        "layout": layout.id,
        "classes": a.classes,
        "sequences": data.len(),
    });
    let text = format!("wrote {} sequences of {} classes to {}\n", data.len(), a.classes, manifest.display());
    emit(&a.output, &doc, &text);
    Ok(0)
}

fn cmd_convert(a: &ConvertArgs) -> Result<i32> {
    let layout = Layout::builtin(&a.layout)?;
    let mut files = Vec::new();
    let mut text = String::new();
    for path in &a.inputs {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let seq = load_sequence_with(&bytes, &layout).map_err(|e| Error::parse(format!("{}: {e}", path.display())))?;
        let prep = Preprocess {
            target_frames: a.frames.unwrap_or(seq.frames()),
            center: a.center,
            stream: a.stream,
        };
        let out_seq = prep.apply(&seq, &layout)?;
        let written = match &a.out {
            Some(dir) => {
                let name = path
                    .file_name()
                    .ok_or_else(|| Error::config(format!("{} has no file name", path.display())))?;
                let target = dir.join(name);
                write_file(&target, &out_seq.to_json())?;
                Some(target)
            }
            None => None,
        };
        text.push_str(&format!(
            "ok {}  label {}  {} frames ({} true)  {} persons{}\n",
            path.display(),
            seq.label,
            out_seq.frames(),
            seq.true_frames,
            seq.persons(),
            written.as_ref().map(|p| format!("  -> {}", p.display())).unwrap_or_default()
        ));
        files.push(json!({
            "input": path,
            "label": seq.label,
            "true_frames": seq.true_frames,
            "frames": out_seq.frames(),
            "persons": seq.persons(),
            "written": written,
        }));
    }
    emit(&a.output, &json!({ "layout": layout.id, "files": files }), &text);
    Ok(0)
}

fn cmd_train(a: &TrainArgs) -> Result<i32> {
    let cfg = resolve(&a.config)?;
    let data = Dataset::load(&a.data)?;
    let mut model = TgnModel::with_layout(cfg.model.clone(), data.layout.clone(), cfg.train.seed)?;
    let report = train(&mut model, &data, &cfg.train)?;
    for e in &report.epochs {
        eprintln!(
            "epoch {:>4}  lr {:.5}  loss {:.5}  train top-1 {:.4}",
            e.epoch, e.lr, e.loss, e.train_top1
        );
    }
    if let Some(path) = &a.save {
        save_checkpoint(&model, path)?;
    }
    let json_text = report.to_json();
    if let Some(path) = &a.out {
        write_file(path, &json_text)?;
    }
    let mut text = format!(
        "params {}  FLOPs {}\nfinal train top-1 {:.4}  top-5 {:.4}\n",
        group_digits(report.params),
        group_digits(report.macs),
        report.final_train.top1,
        report.final_train.top5
    );
    if let Some(e) = &report.eval {
        text.push_str(&format!("test top-1 {:.4}  top-5 {:.4}\n", e.top1, e.top5));
    }
    text.push_str(&format!("wall clock {:.1}s\n", report.wall_clock_seconds));
    emit(&a.output, &serde_json::to_value(&report).expect("reports serialize"), &text);
    Ok(0)
}

fn cmd_eval(a: &EvalArgs) -> Result<i32> {
    let options = match &a.config {
        Some(_) => {
            let cfg = resolve_document(a.config.as_deref(), &a.overrides)?;
            cfg.validate()?;
            log_config(&cfg);
            EvalOptions::from(&cfg.train)
        }
        None if !a.overrides.is_empty() => return Err(Error::config("--set needs --config")),
        None => EvalOptions::default(),
    };
    let weights = if a.weights.is_empty() {
        vec![1.0; a.checkpoints.len()]
    } else {
        a.weights.clone()
    };
    if weights.len() != a.checkpoints.len() {
        return Err(Error::config(format!(
            "{} weights for {} checkpoints",
            weights.len(),
            a.checkpoints.len()
        )));
    }
    let models = a
        .checkpoints
        .iter()
        .map(|p| load_checkpoint(p))
        .collect::<Result<Vec<_>>>()?;
    let data = Dataset::load(&a.data)?;
    let members: Vec<(&TgnModel, f64)> = models.iter().zip(weights.iter().copied()).collect();
    let metrics = evaluate_fused(&members, &data, a.split, &options)?;
    let doc = json!({
        "checkpoints": a.checkpoints,
        "weights": weights,
        "metrics": metrics,
    });
    if let Some(path) = &a.out {
        write_file(path, &serde_json::to_string_pretty(&doc).expect("values serialize"))?;
    }
    let text = format!(
        "{} split, {} samples: top-1 {:.4}  top-5 {:.4}\n",
        serde_json::to_value(metrics.split).expect("splits serialize").as_str().unwrap_or("?"),
        metrics.samples, metrics.top1, metrics.top5
    );
    emit(&a.output, &doc, &text);
    Ok(0)
}

fn cmd_count(a: &CountArgs) -> Result<i32> {
    let cfg = resolve(&a.config)?;
    let layout = Layout::builtin(&cfg.model.layout)?;
    let input = InputShape {
        batch: 1,
        frames: cfg.train.target_frames,
        persons: layout.max_persons,
    };
    let model = TgnModel::with_layout(cfg.model.clone(), layout.clone(), cfg.train.seed)?;
    let params = count_params(&model);
    let macs = count_flops(&model, input)?;
    let baseline_cfg = cfg.model.as_baseline(a.baseline_kernel);
    let baseline = TgnModel::with_layout(baseline_cfg, layout.clone(), cfg.train.seed)?;
    let base_params = count_params(&baseline).total;
    let base_macs = count_flops(&baseline, input)?.total;

    let scales: Vec<&str> = cfg.model.scales.iter().map(|s| s.as_str()).collect();
    let mut text = format!(
        "model: {} {} block, scales {}, shared weights {}\n",
        cfg.model.layout,
        cfg.model.block,
        scales.join(","),
        cfg.model.share_weights_across_scales
    );
    text.push_str("parameters:\n");
    let items = if a.tensors { &params.tensors } else { &params.per_layer };
    for item in items {
        text.push_str(&format!("  {:<40}{:>14}\n", item.name, group_digits(item.count)));
    }
    text.push_str(&format!("  {:<40}{:>14}\n", "total", group_digits(params.total)));
    text.push_str(&format!(
        "FLOPs (multiply-accumulates) for a {}x{}x{}x{}x{} input:\n",
        input.batch,
        cfg.model.in_channels,
        input.frames,
        layout.num_joints(),
        input.persons
    ));
    for item in &macs.per_layer {
        text.push_str(&format!("  {:<40}{:>18}\n", item.name, group_digits(item.count)));
    }
    text.push_str(&format!("  {:<40}{:>18}\n", "graph mixing", group_digits(macs.graph_mixing)));
    text.push_str(&format!("  {:<40}{:>18}\n", "convolution", group_digits(macs.convolution)));
    text.push_str(&format!("  {:<40}{:>18}\n", "total", group_digits(macs.total)));
    text.push_str(&format!(
        "summary: {:.2}M params, {:.2}G FLOPs\n",
        params.total as f64 / 1e6,
        macs.total as f64 / 1e9
    ));
    text.push_str(&format!(
        "GCN+TCN baseline (t={}, same scales): {:.2}M params, {:.2}G FLOPs\n",
        a.baseline_kernel,
        base_params as f64 / 1e6,
        base_macs as f64 / 1e9
    ));
    text.push_str(&format!(
        "TGN <= baseline: params {}, FLOPs {}\n",
        params.total <= base_params,
        macs.total <= base_macs
    ));
    let doc = json!({
        "config": cfg,
        "params": params,
        "flops": macs,
        "baseline": {
            "temporal_kernel": a.baseline_kernel,
            "params": base_params,
            "flops": base_macs,
        },
    });
    if let Some(path) = &a.out {
        write_file(path, &serde_json::to_string_pretty(&doc).expect("values serialize"))?;
    }
    emit(&a.output, &doc, &text);
    Ok(0)
}

fn cmd_gradcheck(a: &GradcheckArgs) -> Result<i32> {
    if a.seeds == 0 {
        return Err(Error::config("--seeds must be at least 1"));
    }
    let mut worst: Vec<(String, f64, u64)> = Vec::new();
    for seed in a.seed..a.seed + a.seeds {
        let report = gradient_suite(seed)?;
        for e in report.entries {
            match worst.iter_mut().find(|w| w.0 == e.name) {
                Some(w) if e.max_rel_error > w.1 => {
                    w.1 = e.max_rel_error;
                    w.2 = seed;
                }
                Some(_) => {}
                None => worst.push((e.name, e.max_rel_error, seed)),
            }
        }
    }
    let max = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    let pass = max < a.tolerance;
    let mut text = String::new();
    for (name, err, seed) in &worst {
        text.push_str(&format!("  {name:<36}{err:>12.3e}  (seed {seed})\n"));
    }
    text.push_str(&format!(
        "max relative error {max:.3e} over {} seeds: {}\n",
        a.seeds,
        if pass { "pass" } else { "FAIL" }
    ));
    let checks: Vec<Value> = worst
        .iter()
        .map(|(name, err, seed)| json!({"name": name, "max_rel_error": err, "seed": seed}))
        .collect();
    let doc = json!({
        "seeds": a.seeds,
        "tolerance": a.tolerance,
        "max_rel_error": max,
        "pass": pass,
        "checks": checks,
    });
    emit(&a.output, &doc, &text);
    Ok(if pass { 0 } else { 2 })
}

fn cmd_ablate(a: &AblateArgs) -> Result<i32> {
    let cfg = resolve(&a.config)?;
    let data = Dataset::load(&a.data)?;
    let (title, rows) = match a.kind {
        AblationKind::Scales => ("multi-scale graphs", multiscale_rows()),
        AblationKind::Blocks => ("TGN block vs GCN + TCN block", block_rows(&cfg.model.scales)),
    };
    let table = ablation_run(title, &cfg.model, &rows, &data, &cfg.train, a.baseline_kernel)?;
    if let Some(path) = &a.out {
        write_file(path, &table.to_json())?;
    }
    emit(&a.output, &serde_json::to_value(&table).expect("tables serialize"), &table.to_text());
    Ok(0)
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Convert(a) => cmd_convert(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Count(a) => cmd_count(a),
        Command::Gradcheck(a) => cmd_gradcheck(a),
        Command::Ablate(a) => cmd_ablate(a),
    }
}

/// Parse `argv` (program name first), run the subcommand and return the
/// process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::Config(ref m) if m.starts_with("missing --config")) {
                eprintln!("usage: mstgn <synth|convert|train|eval|count|gradcheck|ablate> --config <preset|path> [options]");
            }
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}
