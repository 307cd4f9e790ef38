use proptest::prelude::*;
use qsr_core::dataio::*;
use qsr_core::model::{ModelConfig, ModelParams};
use qsr_core::params::Parameters;
use qsr_core::qsim::{Executor, Pauli};
use qsr_core::rng;
use qsr_core::train::*;
use qsr_core::Tensor;

fn micro() -> ModelConfig {
    ModelConfig { num_layers: 2, rotation_basis: Pauli::X, ..ModelConfig::default() }
}

fn synthetic(n: usize, seed: u64) -> DatasetHandle {
    let mut r = rng::seeded(seed);
    let data = (0..n * 28 * 28).map(|_| (rng::uniform(&mut r, 0.0, 256.0) as u32).min(255) as u8).collect();
    make_pairs("synthetic", Split::Train, &RawImages::new(n, 28, 28, 1, data).unwrap()).unwrap()
}

#[test]
fn adam_matches_textbook_recurrence() {
    let cfg = TrainConfig { lr: 0.1, ..TrainConfig::default() };
    let target = [1.0, -2.0, 0.5];
    let mut x = vec![0.0; 3];
    let mut state = AdamState::new(3);
    let (mut m, mut v, mut xr) = ([0.0; 3], [0.0; 3], [0.0f64; 3]);
    let (b1, b2) = cfg.betas;
    for t in 1..=50 {
        let g: Vec<f64> = x.iter().zip(&target).map(|(a, c)| a - c).collect();
        adam_step(&mut x, &g, &mut state, &cfg).unwrap();
        for i in 0..3 {
            let gi = xr[i] - target[i];
            m[i] = b1 * m[i] + (1.0 - b1) * gi;
            v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
            let mh = m[i] / (1.0 - b1.powi(t));
            let vh = v[i] / (1.0 - b2.powi(t));
            xr[i] -= cfg.lr * mh / (vh.sqrt() + cfg.eps);
        }
        for i in 0..3 {
            assert!((x[i] - xr[i]).abs() < 1e-12, "step {t}");
        }
    }
    assert_eq!(state.t, 50);
}

#[test]
fn adam_converges_on_quadratic() {
    let cfg = TrainConfig { lr: 0.05, ..TrainConfig::default() };
    let target = [3.0, -1.0];
    let mut x = vec![0.0; 2];
    let mut state = AdamState::new(2);
    for _ in 0..2000 {
        let g: Vec<f64> = x.iter().zip(&target).map(|(a, c)| a - c).collect();
        adam_step(&mut x, &g, &mut state, &cfg).unwrap();
    }
    assert!(x.iter().zip(&target).all(|(a, c)| (a - c).abs() < 1e-3), "{x:?}");
}

#[test]
fn zero_learning_rate_leaves_model_unchanged() {
    let data = synthetic(3, 1);
    let mut model = ModelParams::init(&micro(), 2).unwrap();
    let before = model.flatten();
    let cfg = TrainConfig { lr: 0.0, batch_size: 2, seed: 3, ..TrainConfig::default() };
    let mut state = AdamState::new(model.param_count());
    let mut steps = 0;
    let stats = train_epoch(&mut model, &data, &cfg, &mut state, 0, &Executor::default(), &mut |_| steps += 1).unwrap();
    assert_eq!(stats.steps, 2);
    assert_eq!(steps, 2);
    assert_eq!(model.flatten(), before);
}

#[test]
fn training_is_bitwise_reproducible() {
    let data = synthetic(4, 4);
    let cfg = TrainConfig { lr: 1e-2, batch_size: 2, seed: 5, ..TrainConfig::default() };
    let run = |workers: usize| {
        let exec = Executor { workers, ..Executor::default() };
        let mut model = ModelParams::init(&micro(), 6).unwrap();
        let mut state = AdamState::new(model.param_count());
        let mut losses = Vec::new();
        train_epoch(&mut model, &data, &cfg, &mut state, 0, &exec, &mut |r| losses.push(r.loss)).unwrap();
        (model.flatten(), losses)
    };
    let a = run(1);
    assert_eq!(a, run(1));
    assert_eq!(a, run(2));
}

#[test]
fn training_reduces_batch_loss() {
    let data = synthetic(2, 7);
    let cfg = TrainConfig { lr: 5e-3, batch_size: 2, seed: 8, ..TrainConfig::default() };
    let exec = Executor::default();
    let mut model = ModelParams::init(&micro(), 9).unwrap();
    let mut state = AdamState::new(model.param_count());
    let pairs: Vec<&ImagePair> = data.items.iter().collect();
    let first = train_step(&mut model, &mut state, &pairs, &cfg, &exec).unwrap();
    for _ in 0..30 {
        train_step(&mut model, &mut state, &pairs, &cfg, &exec).unwrap();
    }
    let (last, _) = batch_gradient(&model, &pairs, qsr_core::model::Mode::Eval, &exec).unwrap();
    assert!(last < first, "{first} -> {last}");
}

#[test]
fn gradient_check_passes_on_small_model() {
    let data = synthetic(1, 10);
    let model = ModelParams::init(&micro(), 11).unwrap();
    let cfg = GradCheckConfig { coords: 60, seed: 12, ..GradCheckConfig::default() };
    let report = grad_check(&model, &data.items[0], &cfg, &Executor::default()).unwrap();
    assert_eq!(report.checked, 60);
    assert!(report.passed, "{report:?}");
}

#[test]
fn relative_error_floor() {
    assert_eq!(relative_error(0.0, 0.0, 1e-4, 1e-8), 0.0);
    assert!((relative_error(1e-9, 0.0, 1e-4, 1e-8) - 1e-5).abs() < 1e-18);
    assert!((relative_error(2.0, 1.0, 1e-4, 1e-8) - 0.5).abs() < 1e-15);
}

#[test]
fn l1_loss_matches_direct_mean() {
    let mut r = rng::seeded(13);
    let a = Tensor::from_vec(&[4, 4, 1], (0..16).map(|_| rng::normal(&mut r)).collect()).unwrap();
    let b = Tensor::zeros(&[4, 4, 1]);
    let (l, g) = l1_loss(&a, &b).unwrap();
    assert!((l - a.data().iter().map(|v| v.abs()).sum::<f64>() / 16.0).abs() < 1e-15);
    assert!(g.data().iter().zip(a.data()).all(|(g, v)| *g == v.signum() / 16.0));
}

#[test]
fn downsample_matches_block_average() {
    let mut r = rng::seeded(14);
    let hr = Tensor::from_vec(&[28, 28, 2], (0..28 * 28 * 2).map(|_| rng::uniform(&mut r, 0.0, 1.0)).collect()).unwrap();
    let lr = downsample2(&hr).unwrap();
    assert_eq!(lr.shape(), &[14, 14, 2]);
    for y in 0..14 {
        for x in 0..14 {
            for c in 0..2 {
                let want = (hr[[2 * y, 2 * x, c]] + hr[[2 * y + 1, 2 * x, c]] + hr[[2 * y, 2 * x + 1, c]] + hr[[2 * y + 1, 2 * x + 1, c]]) / 4.0;
                assert!((lr[[y, x, c]] - want).abs() < 1e-15);
            }
        }
    }
    assert!(downsample2(&Tensor::zeros(&[5, 4, 1])).is_err());
}

#[test]
fn pairs_are_normalized_and_indexed() {
    let raw = RawImages::new(2, 4, 4, 1, (0..32).map(|v| (v * 8) as u8).collect()).unwrap();
    let d = make_pairs("tiny", Split::Test, &raw).unwrap();
    assert_eq!(d.len(), 2);
    assert_eq!(d.items[1].source_index, 1);
    assert_eq!(d.items[1].hr[[0, 0, 0]], 128.0 / 255.0);
    assert_eq!(d.items[0].lr.shape(), &[2, 2, 1]);
    assert!(RawImages::new(2, 4, 4, 1, vec![0; 31]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn batches_cover_each_index_once(len in 1usize..200, bs in 1usize..70, seed: u64, epoch in 0u64..5) {
        let b = batches(len, bs, seed, epoch).unwrap();
        prop_assert_eq!(b.len(), len.div_ceil(bs));
        prop_assert!(b.iter().all(|x| !x.is_empty() && x.len() <= bs));
        let mut all: Vec<usize> = b.concat();
        all.sort_unstable();
        prop_assert_eq!(all, (0..len).collect::<Vec<_>>());
        prop_assert_eq!(&b, &batches(len, bs, seed, epoch).unwrap());
    }
}
