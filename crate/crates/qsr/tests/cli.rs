use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qsr::checkpoint::Checkpoint;
use qsr::image::{read_png, write_png};
use qsr_core::model::{ModelConfig, ModelParams};
use qsr_core::params::Parameters;
use qsr_core::Tensor;

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/mnist-500-images-idx3-ubyte");
const MICRO: [&str; 2] = ["--set", "model.num_layers=2"];

fn qsr(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsr"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("QSR_WORKERS")
        .output()
        .expect("binary runs")
}

fn ok(out: &Path, args: &[&str]) -> String {
    let o = qsr(out, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("manifest.json").exists());
    String::from_utf8(o.stdout).unwrap()
}

fn train(out: &Path, seed: &str, lr: &str) -> PathBuf {
    let mut args = vec!["train", "--dataset", FIXTURE, "--subset", "4", "--epochs", "1", "--batch-size", "2"];
    args.extend(["--lr", lr, "--seed", seed]);
    args.extend(MICRO);
    ok(out, &args);
    out.join("model.qsr1")
}

#[test]
fn zero_learning_rate_keeps_initial_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let ck = Checkpoint::load(&train(dir.path(), "5", "0")).unwrap();
    let cfg = ModelConfig { num_layers: 2, ..ModelConfig::default() };
    assert_eq!(ck.values, ModelParams::init(&cfg, 5).unwrap().flatten());
    let log = std::fs::read_to_string(dir.path().join("steps.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 2);
    let first: serde_json::Value = serde_json::from_str(log.lines().next().unwrap()).unwrap();
    for key in ["step", "epoch", "loss", "lr", "wall_ms"] {
        assert!(first.get(key).is_some(), "{key}");
    }
}

#[test]
fn sr_writes_upscaled_png_and_rejects_odd_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ModelConfig { num_layers: 2, ..ModelConfig::default() };
    let mut model = ModelParams::init(&cfg, 1).unwrap();
    model.conv_up.weight.fill(0.0);
    model.conv_up.bias.fill(0.0);
    model.conv_out.weight.fill(0.0);
    model.conv_out.bias.fill(0.0);
    let ck = dir.path().join("zero.qsr1");
    Checkpoint::from_model(&model, 1, 0).save(&ck).unwrap();
    let input = dir.path().join("in.png");
    write_png(&input, &Tensor::zeros(&[14, 14, 1])).unwrap();
    let output = dir.path().join("out.png");
    let args = ["sr", "--checkpoint", ck.to_str().unwrap(), "--input", input.to_str().unwrap(), "--output", output.to_str().unwrap()];
    ok(dir.path(), &args);
    let y = read_png(&output).unwrap();
    assert_eq!(y.shape(), &[28, 28, 1]);
    assert!(y.data().iter().all(|&v| v == 0.0));
    let first = std::fs::read(&output).unwrap();
    ok(dir.path(), &args);
    assert_eq!(std::fs::read(&output).unwrap(), first);

    write_png(&input, &Tensor::zeros(&[15, 14, 1])).unwrap();
    let o = qsr(dir.path(), &args);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("M=2"));
}

#[test]
fn benchmark_csv_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["benchmark", "--dataset", FIXTURE, "--subset", "20", "--name", "MNIST"];
    ok(a.path(), &args);
    ok(b.path(), &args);
    let csv = std::fs::read_to_string(a.path().join("benchmark.csv")).unwrap();
    assert_eq!(csv, std::fs::read_to_string(b.path().join("benchmark.csv")).unwrap());
    assert_eq!(csv.lines().filter(|l| l.ends_with(",measured")).count(), 3);
    assert_eq!(csv.lines().filter(|l| l.ends_with(",paper")).count(), 8);
    assert!(std::fs::read_to_string(a.path().join("benchmark.txt")).unwrap().contains("paper-reported"));
}

#[test]
fn benchmark_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qsr(dir.path(), &["benchmark", "--dataset", FIXTURE, "--methods", ""]).status.code(), Some(2));
    assert_eq!(qsr(dir.path(), &["benchmark", "--dataset", FIXTURE, "--methods", "model"]).status.code(), Some(2));
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "failed");
}

#[test]
fn noise_sweep_rows_and_degradation() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t");
    let mut args = vec!["train", "--dataset", FIXTURE, "--subset", "8", "--epochs", "5", "--batch-size", "4"];
    args.extend(["--lr", "0.005", "--seed", "2", "--set", "model.rotation_basis=X"]);
    args.extend(MICRO);
    ok(&t, &args);
    let ck = t.join("model.qsr1");
    let args = [
        "noise-sweep", "--checkpoint", ck.to_str().unwrap(), "--dataset", FIXTURE, "--offset", "400", "--subset", "2",
        "--kinds", "depolarizing,bit_flip", "--strengths", "0,1",
    ];
    ok(dir.path(), &args);
    let csv = std::fs::read_to_string(dir.path().join("noise_sweep.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    let psnr = |kind: &str, s: &str| rows.iter().find(|r| r[0] == kind && r[1] == s).unwrap()[2].parse::<f64>().unwrap();
    assert!(psnr("depolarizing", "1") < psnr("depolarizing", "0"));
    assert_eq!(psnr("depolarizing", "0"), psnr("bit_flip", "0"));
    let bad = ["noise-sweep", "--checkpoint", ck.to_str().unwrap(), "--dataset", FIXTURE, "--strengths", "1.5"];
    assert_eq!(qsr(dir.path(), &bad).status.code(), Some(1));
}

#[test]
fn scaling_sweep_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut args = vec!["scaling-sweep", "--dataset", FIXTURE, "--subset", "4", "--dims", "2,4", "--steps", "3", "--set", "train.batch_size=2"];
    args.extend(MICRO);
    ok(a.path(), &args);
    ok(b.path(), &args);
    let csv = std::fs::read_to_string(a.path().join("scaling_sweep.csv")).unwrap();
    assert_eq!(csv, std::fs::read_to_string(b.path().join("scaling_sweep.csv")).unwrap());
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.split(',').nth(1).unwrap().parse::<f64>().unwrap().is_finite()));
    assert_eq!(qsr(a.path(), &["scaling-sweep", "--dataset", FIXTURE, "--dims", "12"]).status.code(), Some(1));
}

#[test]
fn gradcheck_passes_on_micro_config() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["gradcheck", "--coords", "50", "--set", "model.rotation_basis=X"];
    args.extend(MICRO);
    let stdout = ok(dir.path(), &args);
    assert!(stdout.contains("pass"), "{stdout}");
}

#[test]
fn feature_analysis_reports_every_k() {
    let dir = tempfile::tempdir().unwrap();
    let ck = train(&dir.path().join("t"), "3", "0.002");
    let args = ["feature-analysis", "--checkpoint", ck.to_str().unwrap(), "--dataset", FIXTURE, "--subset", "2", "--permutations", "100"];
    ok(dir.path(), &args);
    let first = std::fs::read(dir.path().join("features.json")).unwrap();
    let report: serde_json::Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(report["dcor_by_k"].as_array().unwrap().len(), 5);
    ok(dir.path(), &args);
    assert_eq!(std::fs::read(dir.path().join("features.json")).unwrap(), first);
    assert_eq!(std::fs::read_to_string(dir.path().join("dcor_by_k.csv")).unwrap().lines().count(), 6);
}

#[test]
fn resources_within_budget() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(dir.path(), &["resources"]);
    assert!(stdout.contains("qubits per circuit      8"), "{stdout}");
}
