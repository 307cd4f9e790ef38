//! Command-line interface. Every command writes `manifest.json` into the
//! output directory before it starts and again when it finishes.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use qsr_core::dataio::{make_pairs, DatasetHandle, ImagePair, Split};
use qsr_core::evalkit::{
    benchmark, emit_table, feature_analysis, paper_reference, Baseline, MetricRow, MetricsReport, K_GRID,
};
use qsr_core::model::{resource_report, ModelConfig, ModelParams};
use qsr_core::params::Parameters;
use qsr_core::qsim::{Executor, NoiseChannel, NoiseKind};
use qsr_core::train::{grad_check, train_epoch, train_steps, AdamState, GradCheckConfig, TrainConfig};
use qsr_core::{rng, Tensor};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::checkpoint::Checkpoint;
use crate::manifest::{RunManifest, StepLog};
use crate::{formats, image, write_atomic, Error, Result};

#[derive(Parser, Debug)]
#[command(name = "qsr", version, about = "Quantum-circuit window-attention super-resolution (simulated)")]
pub struct Cli {
    /// Seed for initialization, shuffling, and sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for circuit batches.
    #[arg(long, global = true, env = "QSR_WORKERS", default_value_t = 1)]
    pub workers: usize,
    /// JSON file with `model` and `train` sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override a config value by dotted path, e.g. `model.embed_dim=4`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "qsr-out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Train a model and write checkpoints, a step log, and test metrics.
    Train(TrainArgs),
    /// Upscale one PNG with a trained checkpoint.
    Sr(SrArgs),
    /// PSNR/SSIM table for baselines and, optionally, a checkpoint.
    Benchmark(BenchmarkArgs),
    /// Evaluate a checkpoint with a noise channel after every gate.
    NoiseSweep(NoiseSweepArgs),
    /// Train one model per embedding width under a fixed step budget.
    ScalingSweep(ScalingSweepArgs),
    /// Compare analytic gradients with central differences.
    Gradcheck(GradcheckArgs),
    /// Distance correlation and HSIC of learned features against their
    /// spatial neighbourhoods.
    FeatureAnalysis(FeatureArgs),
    /// Qubit and circuit counts for the configured model.
    Resources(ResourceArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DataArgs {
    /// IDX or QSRT image file.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Dataset label for reference rows (defaults to the file name's first
    /// word).
    #[arg(long)]
    pub name: Option<String>,
    /// Index of the first image used.
    #[arg(long, default_value_t = 0)]
    pub offset: usize,
    /// Number of images used (all remaining by default).
    #[arg(long)]
    pub subset: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TestDataArgs {
    /// Evaluation file (defaults to `--dataset` when a test range is given).
    #[arg(long)]
    pub test_dataset: Option<PathBuf>,
    #[arg(long)]
    pub test_offset: Option<usize>,
    #[arg(long)]
    pub test_subset: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub test: TestDataArgs,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct SrArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Required when `model` is among the methods.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Comma-separated: nearest, bilinear, bicubic, model.
    #[arg(long, default_value = "nearest,bilinear,bicubic")]
    pub methods: String,
}

#[derive(Args, Debug, Serialize)]
pub struct NoiseSweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Comma-separated channel kinds.
    #[arg(long, default_value = "depolarizing")]
    pub kinds: String,
    /// Comma-separated strengths in [0, 1].
    #[arg(long, default_value = "0,0.01,0.05,0.1")]
    pub strengths: String,
}

#[derive(Args, Debug, Serialize)]
pub struct ScalingSweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub test: TestDataArgs,
    /// Comma-separated embedding widths.
    #[arg(long, default_value = "2,4")]
    pub dims: String,
    /// Optimizer steps per width.
    #[arg(long, default_value_t = 300)]
    pub steps: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct GradcheckArgs {
    /// Checkpoint to check (a fresh model from the config otherwise).
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Image file for the sample (a seeded random image otherwise).
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Side of the random low-resolution sample.
    #[arg(long, default_value_t = 4)]
    pub lr_size: usize,
    #[arg(long, default_value_t = 200)]
    pub coords: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub step: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct FeatureArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub permutations: usize,
    /// Cap on pooled positions entering the statistics.
    #[arg(long, default_value_t = 1000)]
    pub max_samples: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct ResourceArgs {
    #[arg(long, default_value_t = 14)]
    pub height: usize,
    #[arg(long, default_value_t = 14)]
    pub width: usize,
}

/// Model and training settings, as read from `--config` and `--set`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub train: TrainConfig,
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                merge(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (b, p) => *b = p,
    }
}

fn apply_set(config: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) =
        assignment.split_once('=').ok_or_else(|| Error::Usage(format!("--set expects KEY=VALUE, got {assignment}")))?;
    let mut slot = &mut *config;
    for part in key.split('.') {
        slot = slot
            .as_object_mut()
            .and_then(|o| o.get_mut(part))
            .ok_or_else(|| Error::Usage(format!("unknown config key {key}")))?;
    }
    *slot = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok(())
}

/// Defaults, then the `--config` file, then each `--set` in order.
pub fn resolve_config(file: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
    let mut value = serde_json::to_value(RunConfig::default()).expect("defaults serialize");
    if let Some(path) = file {
        let patch: Value =
            serde_json::from_slice(&crate::read(path)?).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?;
        merge(&mut value, patch);
    }
    for s in overrides {
        apply_set(&mut value, s)?;
    }
    serde_json::from_value(value).map_err(|e| Error::Usage(format!("invalid configuration: {e}")))
}

fn list<T>(raw: &str, what: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    let items: Vec<&str> = raw.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(Error::Usage(format!("empty {what} list")));
    }
    items.into_iter().map(|s| parse(s).ok_or_else(|| Error::Usage(format!("unknown {what} {s}")))).collect()
}

fn dataset_label(path: &Path) -> String {
    let stem = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    stem.split(['-', '.', '_']).next().unwrap_or_default().to_string()
}

fn load_range(path: &Path, name: Option<&str>, offset: usize, count: Option<usize>, split: Split) -> Result<DatasetHandle> {
    let raw = formats::load_images(path)?;
    let end = match count {
        Some(n) => offset.checked_add(n).filter(|&e| e <= raw.count),
        None => (offset <= raw.count).then_some(raw.count),
    }
    .ok_or_else(|| Error::Usage(format!("{} holds {} images, requested range is out of bounds", path.display(), raw.count)))?;
    let label = name.map(str::to_string).unwrap_or_else(|| dataset_label(path));
    Ok(make_pairs(&label, split, &raw.slice(offset, end)?)?)
}

impl DataArgs {
    fn load(&self, split: Split) -> Result<DatasetHandle> {
        load_range(&self.dataset, self.name.as_deref(), self.offset, self.subset, split)
    }
}

impl TestDataArgs {
    fn path<'a>(&'a self, train: &'a DataArgs) -> Option<&'a Path> {
        match (&self.test_dataset, self.test_offset.or(self.test_subset.map(|_| 0))) {
            (Some(p), _) => Some(p),
            (None, Some(_)) => Some(&train.dataset),
            (None, None) => None,
        }
    }

    fn load(&self, train: &DataArgs) -> Result<Option<DatasetHandle>> {
        self.path(train)
            .map(|p| load_range(p, train.name.as_deref(), self.test_offset.unwrap_or(0), self.test_subset, Split::Test))
            .transpose()
    }
}

struct Ctx {
    seed: u64,
    exec: Executor,
    out: PathBuf,
    config: RunConfig,
    input_hash: String,
    outputs: Vec<PathBuf>,
}

impl Ctx {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.out.join(name);
        write_atomic(&path, bytes)?;
        self.outputs.push(path.clone());
        Ok(path)
    }
}

fn inputs(cmd: &Command) -> Vec<&Path> {
    let mut v: Vec<&Path> = Vec::new();
    match cmd {
        Command::Train(a) => {
            v.push(&a.data.dataset);
            v.extend(a.test.path(&a.data));
        }
        Command::Sr(a) => v.extend([a.checkpoint.as_path(), a.input.as_path()]),
        Command::Benchmark(a) => {
            v.push(&a.data.dataset);
            v.extend(a.checkpoint.as_deref());
        }
        Command::NoiseSweep(a) => v.extend([a.data.dataset.as_path(), a.checkpoint.as_path()]),
        Command::ScalingSweep(a) => {
            v.push(&a.data.dataset);
            v.extend(a.test.path(&a.data));
        }
        Command::Gradcheck(a) => v.extend(a.checkpoint.as_deref().into_iter().chain(a.dataset.as_deref())),
        Command::FeatureAnalysis(a) => v.extend([a.data.dataset.as_path(), a.checkpoint.as_path()]),
        Command::Resources(_) => {}
    }
    v
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Train(_) => "train",
        Command::Sr(_) => "sr",
        Command::Benchmark(_) => "benchmark",
        Command::NoiseSweep(_) => "noise-sweep",
        Command::ScalingSweep(_) => "scaling-sweep",
        Command::Gradcheck(_) => "gradcheck",
        Command::FeatureAnalysis(_) => "feature-analysis",
        Command::Resources(_) => "resources",
    }
}

/// Runs one command. `Ok(false)` means it completed but one of its checks
/// failed.
pub fn run(cli: Cli) -> Result<bool> {
    let mut config = resolve_config(cli.config.as_deref(), &cli.overrides)?;
    config.train.seed = cli.seed;
    if cli.workers == 0 {
        return Err(Error::Usage("--workers must be at least 1".into()));
    }
    let snapshot = serde_json::json!({ "config": &config, "args": &cli.command, "workers": cli.workers });
    let mut manifest = RunManifest::start(command_name(&cli.command), snapshot, cli.seed, &inputs(&cli.command))?;
    let manifest_path = cli.out.join("manifest.json");
    manifest.write(&manifest_path)?;
    let mut ctx = Ctx {
        seed: cli.seed,
        exec: Executor::new(cli.workers),
        out: cli.out.clone(),
        config,
        input_hash: manifest.input_hash.clone(),
        outputs: Vec::new(),
    };
    let result = match &cli.command {
        Command::Train(a) => cmd_train(&mut ctx, a),
        Command::Sr(a) => cmd_sr(&mut ctx, a),
        Command::Benchmark(a) => cmd_benchmark(&mut ctx, a),
        Command::NoiseSweep(a) => cmd_noise_sweep(&mut ctx, a),
        Command::ScalingSweep(a) => cmd_scaling_sweep(&mut ctx, a),
        Command::Gradcheck(a) => cmd_gradcheck(&mut ctx, a),
        Command::FeatureAnalysis(a) => cmd_feature_analysis(&mut ctx, a),
        Command::Resources(a) => cmd_resources(&mut ctx, a),
    };
    manifest.outputs = ctx.outputs;
    manifest.finish(result.as_ref().err().map(ToString::to_string));
    manifest.write(&manifest_path)?;
    result
}

fn model_row(model: &ModelParams, data: &DatasetHandle, exec: &Executor) -> Result<MetricRow> {
    Ok(benchmark("model", data, &mut |p: &ImagePair| model.forward(&p.lr, exec))?)
}

fn baseline_rows(data: &DatasetHandle, methods: &[Baseline], scale: usize) -> Result<Vec<MetricRow>> {
    methods
        .iter()
        .map(|b| Ok(benchmark(b.paper_name(), data, &mut |p: &ImagePair| b.upscale(&p.lr, scale))?))
        .collect()
}

fn write_tables(ctx: &mut Ctx, stem: &str, report: MetricsReport) -> Result<()> {
    let (csv, text) = emit_table(std::slice::from_ref(&report));
    print!("{text}");
    ctx.write(&format!("{stem}.csv"), csv.as_bytes())?;
    ctx.write(&format!("{stem}.txt"), text.as_bytes())?;
    ctx.write(&format!("{stem}.json"), &serde_json::to_vec_pretty(&report).expect("report serializes"))?;
    Ok(())
}

fn cmd_train(ctx: &mut Ctx, a: &TrainArgs) -> Result<bool> {
    let cfg = &mut ctx.config;
    if let Some(e) = a.epochs {
        cfg.train.epochs = e;
    }
    if let Some(lr) = a.lr {
        cfg.train.lr = lr;
    }
    if let Some(b) = a.batch_size {
        cfg.train.batch_size = b;
    }
    let (mcfg, tcfg) = (cfg.model.clone(), cfg.train.clone());
    tcfg.validate()?;
    let data = a.data.load(Split::Train)?;
    let test = a.test.load(&a.data)?;
    let mut model = ModelParams::init(&mcfg, ctx.seed)?;
    let mut state = AdamState::new(model.param_count());
    let log_path = ctx.out.join("steps.jsonl");
    if log_path.exists() {
        std::fs::remove_file(&log_path).map_err(|e| Error::io(&log_path, e))?;
    }
    let mut log = StepLog::append(&log_path)?;
    ctx.outputs.push(log_path);
    let start = Instant::now();
    for epoch in 0..tcfg.epochs {
        let mut log_err = None;
        let stats = train_epoch(&mut model, &data, &tcfg, &mut state, epoch, &ctx.exec, &mut |r| {
            if log_err.is_none() {
                log_err = log.record(r, start.elapsed().as_millis() as u64).err();
            }
        })?;
        if let Some(e) = log_err {
            return Err(e);
        }
        log.flush()?;
        println!("epoch {} mean_loss {:.6} steps {}", epoch + 1, stats.mean_loss, stats.steps);
        ctx.write(&format!("checkpoint-epoch-{:03}.qsr1", epoch + 1), &Checkpoint::from_model(&model, ctx.seed, epoch + 1).encode())?;
        if tcfg.grad_check_every.is_some_and(|n| n > 0 && (epoch + 1) % n == 0) {
            let gc = GradCheckConfig { coords: 20, seed: ctx.seed, ..GradCheckConfig::default() };
            let r = grad_check(&model, &data.items[0], &gc, &ctx.exec)?;
            println!("gradcheck epoch {} max_rel_err {:.3e} ({})", epoch + 1, r.max_rel_err, r.worst_param_name);
        }
    }
    ctx.write("model.qsr1", &Checkpoint::from_model(&model, ctx.seed, tcfg.epochs).encode())?;
    if let Some(test) = test {
        let mut rows = vec![model_row(&model, &test, &ctx.exec)?];
        rows.extend(baseline_rows(&test, &Baseline::ALL, mcfg.upscale)?);
        let report = MetricsReport {
            reference_rows: paper_reference(&test.name),
            dataset: test.name,
            rows,
            fingerprint: ctx.input_hash.clone(),
        };
        write_tables(ctx, "metrics", report)?;
    }
    Ok(true)
}

fn cmd_sr(ctx: &mut Ctx, a: &SrArgs) -> Result<bool> {
    let model = Checkpoint::load(&a.checkpoint)?.model()?;
    let cfg = &model.config;
    let lr = image::read_png(&a.input)?;
    let (h, w, c) = (lr.shape()[0], lr.shape()[1], lr.shape()[2]);
    let m = cfg.window;
    if h % m != 0 || w % m != 0 {
        return Err(Error::Usage(format!("input is {h}×{w}, which is not divisible by the window size M={m}")));
    }
    if c != cfg.channels {
        return Err(Error::Usage(format!("input has {c} channels, the model expects {}", cfg.channels)));
    }
    let sr = model.forward(&lr, &ctx.exec)?;
    image::write_png(&a.output, &sr)?;
    ctx.outputs.push(a.output.clone());
    println!("{}×{} -> {}×{}: {}", h, w, sr.shape()[0], sr.shape()[1], a.output.display());
    Ok(true)
}

enum Method {
    Baseline(Baseline),
    Model,
}

fn cmd_benchmark(ctx: &mut Ctx, a: &BenchmarkArgs) -> Result<bool> {
    let methods = list(&a.methods, "method", |s| match s {
        "model" => Some(Method::Model),
        other => Baseline::parse(other).map(Method::Baseline),
    })?;
    let model = match (&a.checkpoint, methods.iter().any(|m| matches!(m, Method::Model))) {
        (Some(p), true) => Some(Checkpoint::load(p)?.model()?),
        (None, true) => return Err(Error::Usage("method `model` needs --checkpoint".into())),
        (_, false) => None,
    };
    let data = a.data.load(Split::Test)?;
    let scale = model.as_ref().map_or(ctx.config.model.upscale, |m| m.config.upscale);
    let mut rows = Vec::new();
    for m in &methods {
        rows.push(match m {
            Method::Baseline(b) => baseline_rows(&data, &[*b], scale)?.remove(0),
            Method::Model => model_row(model.as_ref().expect("loaded above"), &data, &ctx.exec)?,
        });
    }
    let report = MetricsReport {
        reference_rows: paper_reference(&data.name),
        dataset: data.name,
        rows,
        fingerprint: ctx.input_hash.clone(),
    };
    write_tables(ctx, "benchmark", report)?;
    Ok(true)
}

/// Tolerance for the strength-0 row against noiseless execution.
pub const NOISE_ZERO_TOLERANCE: f64 = 1e-9;

fn cmd_noise_sweep(ctx: &mut Ctx, a: &NoiseSweepArgs) -> Result<bool> {
    let kinds = list(&a.kinds, "noise kind", NoiseKind::parse)?;
    let strengths = list(&a.strengths, "strength", |s| s.parse::<f64>().ok())?;
    let model = Checkpoint::load(&a.checkpoint)?.model()?;
    let data = a.data.load(Split::Test)?;
    let clean = model_row(&model, &data, &ctx.exec)?;
    let mut csv = String::from("kind,strength,psnr_db,ssim\n");
    let mut ok = true;
    for kind in kinds {
        for &s in &strengths {
            let exec = ctx.exec.with_noise(Some(NoiseChannel::new(kind, s)?));
            let row = model_row(&model, &data, &exec)?;
            if s == 0.0 {
                let diff = (row.psnr_db - clean.psnr_db).abs().max((row.ssim - clean.ssim).abs());
                if diff > NOISE_ZERO_TOLERANCE {
                    eprintln!("{} at strength 0 differs from noiseless execution by {diff:.3e}", kind.name());
                    ok = false;
                }
            }
            println!("{:<18} {:>6} psnr {:.4} ssim {:.4}", kind.name(), s, row.psnr_db, row.ssim);
            csv.push_str(&format!("{},{},{:.6},{:.6}\n", kind.name(), s, row.psnr_db, row.ssim));
        }
    }
    ctx.write("noise_sweep.csv", csv.as_bytes())?;
    Ok(ok)
}

fn cmd_scaling_sweep(ctx: &mut Ctx, a: &ScalingSweepArgs) -> Result<bool> {
    let dims = list(&a.dims, "dimension", |s| s.parse::<usize>().ok())?;
    if let Some(&d) = dims.iter().find(|&&d| d > 10) {
        return Err(qsr_core::Error::Capacity(format!("embedding width {d} exceeds 10 qubits")).into());
    }
    let data = a.data.load(Split::Train)?;
    let test = a.test.load(&a.data)?.unwrap_or_else(|| data.clone());
    let mut csv = String::from("dim,psnr_db,ssim,params\n");
    let mut ok = true;
    for d in dims {
        let mut mcfg = ModelConfig { embed_dim: d, ..ctx.config.model.clone() };
        if d % mcfg.heads != 0 {
            mcfg.heads = 1;
        }
        let mut model = ModelParams::init(&mcfg, ctx.seed)?;
        let mut state = AdamState::new(model.param_count());
        train_steps(&mut model, &data, &ctx.config.train, &mut state, a.steps, &ctx.exec, &mut |_| {})?;
        let row = model_row(&model, &test, &ctx.exec)?;
        ok &= row.psnr_db.is_finite();
        println!("dim {d:>2} params {:>5} psnr {:.4} ssim {:.4}", model.param_count(), row.psnr_db, row.ssim);
        csv.push_str(&format!("{d},{:.6},{:.6},{}\n", row.psnr_db, row.ssim, model.param_count()));
    }
    ctx.write("scaling_sweep.csv", csv.as_bytes())?;
    Ok(ok)
}

fn cmd_gradcheck(ctx: &mut Ctx, a: &GradcheckArgs) -> Result<bool> {
    let model = match &a.checkpoint {
        Some(p) => Checkpoint::load(p)?.model()?,
        None => ModelParams::init(&ctx.config.model, ctx.seed)?,
    };
    let sample = match &a.dataset {
        Some(p) => load_range(p, None, 0, Some(1), Split::Train)?.items.remove(0),
        None => {
            let (n, c) = (a.lr_size * model.config.upscale, model.config.channels);
            let mut r = rng::derived(ctx.seed, 1);
            let hr = Tensor::from_vec(&[n, n, c], (0..n * n * c).map(|_| rng::uniform(&mut r, 0.0, 1.0)).collect())?;
            let lr = if model.config.upscale == 2 {
                qsr_core::dataio::downsample2(&hr)?
            } else {
                let m = a.lr_size;
                Tensor::from_vec(&[m, m, c], (0..m * m * c).map(|_| rng::uniform(&mut r, 0.0, 1.0)).collect())?
            };
            ImagePair { lr, hr, source_index: 0 }
        }
    };
    let gc = GradCheckConfig { coords: a.coords, step: a.step, tolerance: a.tolerance, seed: ctx.seed, ..GradCheckConfig::default() };
    let report = grad_check(&model, &sample, &gc, &ctx.exec)?;
    println!(
        "max_rel_err {:.3e} at {} over {} coordinates: {}",
        report.max_rel_err,
        report.worst_param_name,
        report.checked,
        if report.passed { "pass" } else { "FAIL" }
    );
    ctx.write("gradcheck.json", &serde_json::to_vec_pretty(&report).expect("report serializes"))?;
    Ok(report.passed)
}

fn cmd_feature_analysis(ctx: &mut Ctx, a: &FeatureArgs) -> Result<bool> {
    let model = Checkpoint::load(&a.checkpoint)?.model()?;
    let data = a.data.load(Split::Test)?;
    let maps = data.items.iter().map(|p| model.features(&p.lr, &ctx.exec)).collect::<qsr_core::Result<Vec<_>>>()?;
    let report = feature_analysis(&maps, &K_GRID, a.permutations, ctx.seed, a.max_samples)?;
    let mut csv = String::from("k,dcor\n");
    for (k, d) in &report.dcor_by_k {
        println!("k {k:>4} dcor {d:.6}");
        csv.push_str(&format!("{k},{d:.8}\n"));
    }
    println!("hsic k {} stat {:.6e} p_value {:.6}", report.hsic_k, report.hsic_stat, report.p_value);
    ctx.write("features.json", &serde_json::to_vec_pretty(&report).expect("report serializes"))?;
    ctx.write("dcor_by_k.csv", csv.as_bytes())?;
    Ok(true)
}

/// Circuit-width budget the default model must respect.
pub const QUBIT_BUDGET: usize = 10;

fn cmd_resources(ctx: &mut Ctx, a: &ResourceArgs) -> Result<bool> {
    let r = resource_report(&ctx.config.model, a.height, a.width)?;
    println!("qubits per circuit      {}", r.qubits_per_circuit);
    println!("paper formula ⌈log2 D⌉  {}", r.paper_formula_qubits);
    println!("circuits per forward    {}", r.circuits_per_forward);
    println!("trainable parameters    {}", r.param_count);
    ctx.write("resources.json", &serde_json::to_vec_pretty(&r).expect("report serializes"))?;
    Ok(r.qubits_per_circuit <= QUBIT_BUDGET)
}
