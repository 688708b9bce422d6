use super::*;
use crate::domain::{ModuleDesign, SampleGrid, Sweep};
use crate::oracle::{generate_samples, GroundTruthLaw};

fn line_data() -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let xs: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64 / 10.0 - 5.0]).collect();
    let ys = xs.iter().map(|x| vec![2.0 * x[0]]).collect();
    (xs, ys)
}

#[test]
fn r_squared_hand_values() {
    assert_eq!(r_squared(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
    assert_eq!(r_squared(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
    assert_eq!(r_squared(&[0.0, 0.5], &[0.0, 1.0]).unwrap(), 0.5);
    assert_eq!(r_squared(&[1.0, 1.0], &[3.0, 3.0]), Err(MlpError::ZeroVariance));
    assert_eq!(r_squared(&[1.0], &[3.0]), Err(MlpError::TooFewPoints(1)));
}

#[test]
fn fits_a_line() {
    let (xs, ys) = line_data();
    let spec = MlpSpec::new(1, vec![8], 1, 1).unwrap();
    let cfg = TrainConfig { learning_rate: 1e-2, max_iterations: 2000, ..TrainConfig::default() };
    let (m, h) = train(&spec, &xs, &ys, &cfg).unwrap();
    assert!(h.min_holdout_r2().unwrap() >= 0.999, "{:?}", h.holdout_r2);
    // loss never rises across a 50-iteration window on this convex task
    for w in h.loss.windows(51) {
        assert!(w[50] <= w[0] * (1.0 + 1e-9));
    }
    // training point is reproduced within 3× training rmse
    let y = m.predict(&xs[37]).unwrap()[0];
    assert!((y - ys[37][0]).abs() <= 3.0 * h.train_rmse[0] + 1e-12);
    assert!(m.predict(&[0.0]).unwrap()[0].abs() < 0.05);
}

#[test]
fn zero_iterations_keep_initial_weights() {
    let (xs, ys) = line_data();
    let spec = MlpSpec::new(1, vec![4], 1, 9).unwrap();
    let cfg = TrainConfig { max_iterations: 0, ..TrainConfig::default() };
    let (m, h) = train(&spec, &xs, &ys, &cfg).unwrap();
    assert_eq!(m.layers, MlpSurrogate::init(&spec).unwrap().layers);
    assert!(h.loss.is_empty());
    assert!(h.train_r2[0].is_some());
}

#[test]
fn oracle_joint_law_reaches_paper_threshold() {
    // moment-induced deflection comparable to the natural one
    let law = GroundTruthLaw::separable_linear(0.02, 0.3, 0.1, 0.0, 0.05);
    let grid = SampleGrid::new(Sweep::new(0.0, 15.0, 0.5).unwrap(), Sweep::new(0.0, 0.8, 0.05).unwrap(), "y").unwrap();
    let set = generate_samples(&law, &grid, &ModuleDesign::new(3.0, 5.0, 4.0, 1.5).unwrap(), crate::domain::ActuationKind::Pressure).unwrap();
    let xs: Vec<Vec<f64>> = set.records.iter().map(|r| vec![r.p, r.u]).collect();
    let ys: Vec<Vec<f64>> = set.records.iter().map(|r| vec![r.tau]).collect();
    let spec = MlpSpec::new(2, vec![64, 64], 1, 0).unwrap();
    let cfg = TrainConfig { learning_rate: 3e-3, final_lr_fraction: 0.05, batch_size: 32, max_iterations: 600, ..TrainConfig::default() };
    let t = std::time::Instant::now();
    let (_, h) = train(&spec, &xs, &ys, &cfg).unwrap();
    eprintln!("oracle mlp: holdout {:?} train {:?} in {:?}", h.holdout_r2, h.train_r2, t.elapsed());
    assert!(h.min_holdout_r2().unwrap() >= 0.999);
}

#[test]
fn backprop_matches_finite_differences() {
    let spec = MlpSpec::new(3, vec![7, 5], 2, 4).unwrap();
    let mut m = MlpSurrogate::init(&spec).unwrap();
    for l in &mut m.layers {
        l.b.iter_mut().enumerate().for_each(|(i, b)| *b = 0.1 * i as f64 - 0.2);
    }
    let dev = gradient_check(&m, &[0.3, -1.1, 0.7], &[0.5, -0.25]).unwrap();
    assert!(dev <= 1e-4, "{dev}");
    assert_eq!(dev, gradient_check(&m, &[0.3, -1.1, 0.7], &[0.5, -0.25]).unwrap());
}

#[test]
fn zero_network_has_zero_gradient_deviation() {
    let spec = MlpSpec::new(2, vec![3], 1, 0).unwrap();
    let mut m = MlpSurrogate::init(&spec).unwrap();
    for l in &mut m.layers {
        l.w.fill(0.0);
    }
    assert_eq!(gradient_check(&m, &[1.0, 2.0], &[0.0]).unwrap(), 0.0);
}

#[test]
fn serialization_is_bit_exact() {
    let (xs, ys) = line_data();
    let spec = MlpSpec::new(1, vec![6, 3], 1, 2).unwrap();
    let cfg = TrainConfig { max_iterations: 50, ..TrainConfig::default() };
    let (m, _) = train(&spec, &xs, &ys, &cfg).unwrap();
    let text = m.to_json();
    let back = MlpSurrogate::from_json(&text).unwrap();
    assert_eq!(back, m);
    assert_eq!(back.to_json(), text);
    assert_eq!(back.predict(&[1.234]).unwrap()[0].to_bits(), m.predict(&[1.234]).unwrap()[0].to_bits());
}

#[test]
fn training_is_deterministic() {
    let (xs, ys) = line_data();
    let spec = MlpSpec::new(1, vec![8], 1, 1).unwrap();
    let cfg = TrainConfig { batch_size: 16, max_iterations: 20, ..TrainConfig::default() };
    let a = train(&spec, &xs, &ys, &cfg).unwrap();
    let b = train(&spec, &xs, &ys, &cfg).unwrap();
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
}

#[test]
fn normalization_round_trip() {
    let rows = vec![vec![1.0, 1e3, -7.0], vec![2.5, 3e3, -7.0], vec![-4.0, 2e3, -7.0]];
    let a = Affine::standardize(&rows, 3);
    assert!(a.is_invertible());
    for r in &rows {
        let back = a.inverse(&a.forward(r));
        for (x, y) in back.iter().zip(r) {
            assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }
}

#[test]
fn predictions_stay_finite_outside_training_range() {
    let (xs, ys) = line_data();
    let spec = MlpSpec::new(1, vec![8], 1, 1).unwrap();
    let (m, _) = train(&spec, &xs, &ys, &TrainConfig { max_iterations: 100, ..TrainConfig::default() }).unwrap();
    for x in [-10.0, 10.0] {
        assert!(m.predict(&[x]).unwrap()[0].is_finite());
    }
    let out = m.predict_batch(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
    assert_eq!(out.len(), 3);
    assert_eq!(out[1], m.predict(&[2.0]).unwrap());
}

#[test]
fn dimension_errors() {
    let spec = MlpSpec::new(2, vec![3], 1, 0).unwrap();
    let m = MlpSurrogate::init(&spec).unwrap();
    assert_eq!(m.predict(&[1.0]), Err(MlpError::DimensionMismatch { expected: 2, got: 1 }));
    assert!(train(&spec, &[vec![1.0]], &[vec![1.0]], &TrainConfig::default()).is_err());
    assert!(MlpSpec::new(2, vec![], 1, 0).is_err());
}
