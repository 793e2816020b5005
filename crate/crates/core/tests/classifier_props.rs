use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use viewlab::classifier::*;
use viewlab::geometry::{CameraIntrinsics, ViewpointBounds};
use viewlab::library::make_object_library;
use viewlab::optim::OptimizerKind;
use viewlab::renderer::RenderedImage;
use viewlab::viat::{accuracy, pretrain, Workbench};

fn tiny() -> Architecture {
    Architecture {
        input_dim: 4 * 4 * 3,
        hidden: vec![1],
        classes: 3,
    }
}

fn random_batch(rng: &mut ChaCha8Rng, n: usize, dim: usize, classes: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let xs = (0..n).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
    let ys = (0..n).map(|_| rng.random_range(0..classes)).collect();
    (xs, ys)
}

/// Mean cross-entropy recomputed from the forward pass alone.
fn mean_loss(params: &ClassifierParams, xs: &[Vec<f64>], ys: &[usize]) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(x, &y)| {
            let z = params.forward(x).unwrap();
            let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln() - z[y]
        })
        .sum::<f64>()
        / xs.len() as f64
}

pub fn max_relative_gradient_error(params: &ClassifierParams, xs: &[Vec<f64>], ys: &[usize], h: f64) -> f64 {
    let refs: Vec<&[f64]> = xs.iter().map(|x| x.as_slice()).collect();
    let (_, grad) = params.loss_and_gradient(&refs, ys).unwrap();
    let flat = params.flatten();
    let mut worst: f64 = 0.0;
    for i in 0..flat.len() {
        let mut p = params.clone();
        let mut f = flat.clone();
        f[i] = flat[i] + h;
        p.assign_flat(&f).unwrap();
        let up = mean_loss(&p, xs, ys);
        f[i] = flat[i] - h;
        p.assign_flat(&f).unwrap();
        let down = mean_loss(&p, xs, ys);
        let fd = (up - down) / (2.0 * h);
        let denom = grad[i].abs().max(fd.abs()).max(1e-8);
        worst = worst.max((grad[i] - fd).abs() / denom);
    }
    worst
}

#[test]
fn backprop_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for seed in 0..5 {
        let params = ClassifierParams::init(tiny(), seed);
        let (xs, ys) = random_batch(&mut rng, 4, 48, 3);
        let err = max_relative_gradient_error(&params, &xs, &ys, 1e-4);
        assert!(err < 1e-4, "seed {seed}: {err}");
    }
}

#[test]
fn backprop_matches_on_two_hidden_layers() {
    let arch = Architecture {
        input_dim: 12,
        hidden: vec![5, 4],
        classes: 3,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let params = ClassifierParams::init(arch, 3);
    let (xs, ys) = random_batch(&mut rng, 6, 12, 3);
    assert!(max_relative_gradient_error(&params, &xs, &ys, 1e-4) < 1e-4);
}

fn image(values: Vec<f64>) -> RenderedImage {
    RenderedImage {
        width: 4,
        height: 4,
        pixels: values,
    }
}

#[test]
fn separable_pair_is_learned() {
    let arch = Architecture {
        input_dim: 48,
        hidden: vec![8],
        classes: 2,
    };
    for kind in [OptimizerKind::Adam, OptimizerKind::Sgd] {
        let mut params = ClassifierParams::init(arch.clone(), 0);
        let mut batch = TrainBatch::default();
        batch.push(image(vec![0.9; 48]), 0, SampleSource::Clean);
        batch.push(image(vec![0.1; 48]), 1, SampleSource::Clean);
        let mut state = TrainerState::new(kind, &params);
        let lr = if kind == OptimizerKind::Adam { 1e-2 } else { 0.1 };
        let first = train_step(&mut params, &batch, lr, &mut state).unwrap();
        let mut last = first;
        for _ in 0..99 {
            last = train_step(&mut params, &batch, lr, &mut state).unwrap();
        }
        assert!(last < first * 0.5, "{kind:?}: {first} -> {last}");
    }
}

#[test]
fn zero_learning_rate_is_a_no_op() {
    let mut params = ClassifierParams::init(tiny(), 4);
    let before = params.clone();
    let mut batch = TrainBatch::default();
    batch.push(image(vec![0.5; 48]), 2, SampleSource::Adversarial);
    for kind in [OptimizerKind::Adam, OptimizerKind::Sgd] {
        let mut state = TrainerState::new(kind, &params);
        train_step(&mut params, &batch, 0.0, &mut state).unwrap();
        assert_eq!(params, before);
    }
}

#[test]
fn softmax_and_scaling_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let z: Vec<f64> = (0..7).map(|_| rng.random_range(-30.0..30.0)).collect();
        assert!((softmax(&z).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let scaled: Vec<f64> = z.iter().map(|v| v * 3.5).collect();
        assert_eq!(argmax(&z), argmax(&scaled));
        let y = rng.random_range(0..7);
        let direct = -(z[y].exp() / z.iter().map(|v| v.exp()).sum::<f64>()).ln();
        assert!((cross_entropy(&z, y).unwrap() - direct).abs() < 1e-9 * direct.max(1.0));
    }
}

#[test]
fn checkpoint_round_trip_is_exact() {
    let params = ClassifierParams::init(Architecture::for_image(8, 8, 4), 11);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    params.save_json(&path).unwrap();
    assert_eq!(ClassifierParams::load_json(&path).unwrap(), params);
}

#[test]
fn standard_training_reaches_natural_accuracy() {
    let objects = make_object_library(3, 4, 0).unwrap();
    let wb = Workbench::new(objects, CameraIntrinsics::default(), ViewpointBounds::standard(), 64, 0).unwrap();
    let held_out = wb.natural_renders(20, 99).unwrap();
    let mut params = ClassifierParams::init(wb.architecture(), 0);
    let losses = pretrain(&wb, &mut params, 2000, 32, 1e-3, 0).unwrap();
    assert!(losses.iter().all(|l| l.is_finite()));
    let acc = accuracy(&params, &held_out).unwrap();
    assert!(acc >= 0.95, "natural accuracy {acc}");
}

#[test]
fn oracle_counts_and_matches_manual_composition() {
    let objects = make_object_library(3, 1, 3).unwrap();
    let intr = CameraIntrinsics { width: 8, height: 8, ..Default::default() };
    let wb = Workbench::new(objects, intr, ViewpointBounds::standard(), 0, 0).unwrap();
    let params = ClassifierParams::init(wb.architecture(), 1);
    let oracle = wb.oracle(&params, 2).unwrap();
    use viewlab::oracle::ViewpointOracle;
    let v = viewlab::geometry::Viewpoint { psi: 20.0, phi: 70.0, ..viewlab::geometry::Viewpoint::ZERO };
    let l = oracle.loss(&v);
    let manual = cross_entropy(&params.forward_image(&wb.render(2, &v).unwrap()).unwrap(), 2).unwrap();
    assert_eq!(l, manual);
    assert!(l >= 0.0);
    assert_eq!(oracle.queries(), 1);
}
