use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{r_squared, Affine, MlpError, MlpSpec, MlpSurrogate, Normalizer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Learning rate at the last iteration as a fraction of the initial one;
    /// the rate decays geometrically in between. 1 keeps it constant.
    pub final_lr_fraction: f64,
    /// 0 means full batch.
    pub batch_size: usize,
    /// Passes over the training rows.
    pub max_iterations: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub holdout_fraction: f64,
    pub seed: u64,
    /// Fixed input scaling; when absent inputs are standardized from the data.
    pub input_normalizer: Option<Affine>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            final_lr_fraction: 1.0,
            batch_size: 0,
            max_iterations: 1000,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            holdout_fraction: 0.2,
            seed: 0,
            input_normalizer: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), MlpError> {
        let bad = |m: &str| Err(MlpError::InvalidConfig(m.into()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be > 0");
        }
        if !(self.final_lr_fraction > 0.0 && self.final_lr_fraction <= 1.0) {
            return bad("final_lr_fraction must be in (0, 1]");
        }
        if !(0.0..1.0).contains(&self.holdout_fraction) {
            return bad("holdout_fraction must be in [0, 1)");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || !(self.epsilon > 0.0) {
            return bad("adam betas must be in [0, 1) and epsilon > 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    /// Normalized-unit training MSE after each iteration.
    pub loss: Vec<f64>,
    pub train_r2: Vec<Option<f64>>,
    pub holdout_r2: Vec<Option<f64>>,
    /// Per-output RMSE on the training rows, original units.
    pub train_rmse: Vec<f64>,
    pub train_rows: usize,
    pub holdout_rows: usize,
    pub config: TrainConfig,
}

impl TrainHistory {
    /// Lowest R² over outputs that have one; `None` if no output does.
    pub fn min_holdout_r2(&self) -> Option<f64> {
        self.holdout_r2.iter().flatten().copied().reduce(f64::min)
    }

    pub fn min_train_r2(&self) -> Option<f64> {
        self.train_r2.iter().flatten().copied().reduce(f64::min)
    }
}

struct Adam {
    m: Vec<(DMatrix<f64>, DVector<f64>)>,
    v: Vec<(DMatrix<f64>, DVector<f64>)>,
    t: i32,
}

impl Adam {
    fn new(model: &MlpSurrogate) -> Self {
        let zeros: Vec<_> = model
            .layers
            .iter()
            .map(|l| (DMatrix::zeros(l.w.nrows(), l.w.ncols()), DVector::zeros(l.b.len())))
            .collect();
        Self { m: zeros.clone(), v: zeros, t: 0 }
    }

    fn step(&mut self, model: &mut MlpSurrogate, grads: &[(DMatrix<f64>, DVector<f64>)], lr: f64, cfg: &TrainConfig) {
        self.t += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.t);
        let c2 = 1.0 - cfg.beta2.powi(self.t);
        let update = |p: &mut [f64], m: &mut [f64], v: &mut [f64], g: &[f64]| {
            for k in 0..p.len() {
                m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
                v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
                p[k] -= lr * (m[k] / c1) / ((v[k] / c2).sqrt() + cfg.epsilon);
            }
        };
        for (i, layer) in model.layers.iter_mut().enumerate() {
            let (gw, gb) = &grads[i];
            let (mw, mb) = &mut self.m[i];
            let (vw, vb) = &mut self.v[i];
            update(layer.w.as_mut_slice(), mw.as_mut_slice(), vw.as_mut_slice(), gw.as_slice());
            update(layer.b.as_mut_slice(), mb.as_mut_slice(), vb.as_mut_slice(), gb.as_slice());
        }
    }
}

fn rows_to_matrix(rows: &[&Vec<f64>], map: &Affine) -> DMatrix<f64> {
    let dim = map.dim();
    let mut m = DMatrix::zeros(rows.len(), dim);
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in map.forward(r).into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    m
}

fn per_output_r2(model: &MlpSurrogate, xs: &[&Vec<f64>], ys: &[&Vec<f64>]) -> Vec<Option<f64>> {
    let preds: Vec<Vec<f64>> = xs.iter().map(|x| model.predict(x).expect("dims checked")).collect();
    (0..model.spec.output_dim)
        .map(|k| {
            let p: Vec<f64> = preds.iter().map(|r| r[k]).collect();
            let t: Vec<f64> = ys.iter().map(|r| r[k]).collect();
            r_squared(&p, &t).ok()
        })
        .collect()
}

/// Trains a fresh network. Rows are split into train and holdout by a seeded
/// permutation; outputs are standardized on the training rows.
pub fn train(
    spec: &MlpSpec,
    inputs: &[Vec<f64>],
    outputs: &[Vec<f64>],
    cfg: &TrainConfig,
) -> Result<(MlpSurrogate, TrainHistory), MlpError> {
    spec.validate()?;
    cfg.validate()?;
    if inputs.is_empty() {
        return Err(MlpError::EmptyData);
    }
    if outputs.len() != inputs.len() {
        return Err(MlpError::DimensionMismatch { expected: inputs.len(), got: outputs.len() });
    }
    for x in inputs {
        if x.len() != spec.input_dim {
            return Err(MlpError::DimensionMismatch { expected: spec.input_dim, got: x.len() });
        }
    }
    for y in outputs {
        if y.len() != spec.output_dim {
            return Err(MlpError::DimensionMismatch { expected: spec.output_dim, got: y.len() });
        }
    }
    if let Some(n) = &cfg.input_normalizer {
        if n.dim() != spec.input_dim {
            return Err(MlpError::DimensionMismatch { expected: spec.input_dim, got: n.dim() });
        }
        if !n.is_invertible() {
            return Err(MlpError::InvalidConfig("input normalizer has a zero scale".into()));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    order.shuffle(&mut rng);
    let n_hold = ((inputs.len() as f64) * cfg.holdout_fraction).floor() as usize;
    let n_hold = n_hold.min(inputs.len() - 1);
    let (hold_idx, train_idx) = order.split_at(n_hold);
    let mut train_idx = train_idx.to_vec();
    train_idx.sort_unstable();
    let mut hold_idx = hold_idx.to_vec();
    hold_idx.sort_unstable();

    let tx: Vec<&Vec<f64>> = train_idx.iter().map(|&i| &inputs[i]).collect();
    let ty: Vec<&Vec<f64>> = train_idx.iter().map(|&i| &outputs[i]).collect();
    let hx: Vec<&Vec<f64>> = hold_idx.iter().map(|&i| &inputs[i]).collect();
    let hy: Vec<&Vec<f64>> = hold_idx.iter().map(|&i| &outputs[i]).collect();

    let owned_tx: Vec<Vec<f64>> = tx.iter().map(|v| (*v).clone()).collect();
    let owned_ty: Vec<Vec<f64>> = ty.iter().map(|v| (*v).clone()).collect();
    let mut model = MlpSurrogate::init(spec)?;
    model.normalizer = Normalizer {
        input: cfg.input_normalizer.clone().unwrap_or_else(|| Affine::standardize(&owned_tx, spec.input_dim)),
        output: Affine::standardize(&owned_ty, spec.output_dim),
    };
    let xm = rows_to_matrix(&tx, &model.normalizer.input);
    let ym = rows_to_matrix(&ty, &model.normalizer.output);

    let n = tx.len();
    let batch = if cfg.batch_size == 0 || cfg.batch_size >= n { n } else { cfg.batch_size };
    let mut adam = Adam::new(&model);
    let mut loss_hist = Vec::with_capacity(cfg.max_iterations);
    let decay = if cfg.max_iterations > 1 {
        cfg.final_lr_fraction.powf(1.0 / (cfg.max_iterations - 1) as f64)
    } else {
        1.0
    };
    let mut lr = cfg.learning_rate;
    let mut rows: Vec<usize> = (0..n).collect();
    for it in 0..cfg.max_iterations {
        if batch == n {
            let (loss, grads) = model.loss_and_grad(&xm, &ym);
            if !loss.is_finite() {
                return Err(MlpError::NonFiniteLoss { iteration: it });
            }
            adam.step(&mut model, &grads, lr, cfg);
        } else {
            rows.shuffle(&mut rng);
            for chunk in rows.chunks(batch) {
                let xb = xm.select_rows(chunk.iter());
                let yb = ym.select_rows(chunk.iter());
                let (loss, grads) = model.loss_and_grad(&xb, &yb);
                if !loss.is_finite() {
                    return Err(MlpError::NonFiniteLoss { iteration: it });
                }
                adam.step(&mut model, &grads, lr, cfg);
            }
        }
        let out = model.forward_batch(&xm).0.pop().expect("output layer");
        let loss = (out - &ym).norm_squared() / ym.len() as f64;
        if !loss.is_finite() {
            return Err(MlpError::NonFiniteLoss { iteration: it });
        }
        loss_hist.push(loss);
        lr *= decay;
    }

    let train_r2 = per_output_r2(&model, &tx, &ty);
    let holdout_r2 = if hx.len() >= 2 { per_output_r2(&model, &hx, &hy) } else { vec![None; spec.output_dim] };
    let preds: Vec<Vec<f64>> = tx.iter().map(|x| model.predict(x).expect("dims checked")).collect();
    let train_rmse = (0..spec.output_dim)
        .map(|k| {
            let s: f64 = preds.iter().zip(&ty).map(|(p, y)| (p[k] - y[k]).powi(2)).sum();
            (s / n as f64).sqrt()
        })
        .collect();
    let history = TrainHistory {
        loss: loss_hist,
        train_r2,
        holdout_r2,
        train_rmse,
        train_rows: n,
        holdout_rows: hx.len(),
        config: cfg.clone(),
    };
    Ok((model, history))
}
