//! Train a 64-64 network on one design's samples.

use prbm_surrogate::mlp::{train, MlpSpec, TrainConfig};
use prbm_surrogate::oracle::SyntheticFamily;

fn main() {
    let truth = SyntheticFamily::gripper();
    let set = &truth.generate(&truth.reference).unwrap()[0];
    let xs: Vec<Vec<f64>> = set.records.iter().map(|r| vec![r.p, r.u]).collect();
    let ys: Vec<Vec<f64>> = set.records.iter().map(|r| vec![r.tau]).collect();
    let spec = MlpSpec::new(2, vec![64, 64], 1, 0).unwrap();
    let cfg = TrainConfig { learning_rate: 3e-3, final_lr_fraction: 0.05, max_iterations: 600, ..TrainConfig::default() };
    let (m, h) = train(&spec, &xs, &ys, &cfg).expect("training");
    println!("{} parameters, holdout R² {:?}", m.parameter_count(), h.holdout_r2);
    let r = &set.records[set.records.len() / 2];
    println!("p={} u={:.4}: oracle {:.6}, network {:.6}", r.p, r.u, r.tau, m.predict_scalar(&[r.p, r.u]).unwrap());
}
