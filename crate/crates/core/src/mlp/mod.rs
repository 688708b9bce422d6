//! Dense ReLU networks trained with Adam on a mean-squared-error loss.
//!
//! Inputs and outputs are affinely normalized before the forward pass and
//! de-normalized after it; the stored weights act in normalized units.

mod train;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::ActuationKind;

pub use train::{train, TrainConfig, TrainHistory};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MlpError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("training data is empty")]
    EmptyData,
    #[error("loss became non-finite at iteration {iteration}; lower the learning rate")]
    NonFiniteLoss { iteration: usize },
    #[error("targets have zero variance")]
    ZeroVariance,
    #[error("need at least 2 predictions, got {0}")]
    TooFewPoints(usize),
    #[error("model document: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
    pub seed: u64,
}

impl MlpSpec {
    pub fn new(input_dim: usize, hidden: Vec<usize>, output_dim: usize, seed: u64) -> Result<Self, MlpError> {
        let s = Self { input_dim, hidden, output_dim, seed };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), MlpError> {
        if self.input_dim == 0 || self.output_dim == 0 {
            return Err(MlpError::InvalidSpec("input and output dims must be >= 1".into()));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(MlpError::InvalidSpec(format!("hidden widths must be non-empty and >= 1, got {:?}", self.hidden)));
        }
        Ok(())
    }

    /// Layer widths from input to output.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.input_dim];
        w.extend(&self.hidden);
        w.push(self.output_dim);
        w
    }

    pub fn parameter_count(&self) -> usize {
        self.widths().windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }
}

/// Per-coordinate affine map `z = (x − shift) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Affine {
    pub fn identity(dim: usize) -> Self {
        Self { shift: vec![0.0; dim], scale: vec![1.0; dim] }
    }

    /// Zero mean, unit variance per column. Constant columns keep scale 1.
    pub fn standardize(rows: &[Vec<f64>], dim: usize) -> Self {
        let n = rows.len().max(1) as f64;
        let mut shift = vec![0.0; dim];
        for r in rows {
            for (m, v) in shift.iter_mut().zip(r) {
                *m += v;
            }
        }
        shift.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for r in rows {
            for k in 0..dim {
                var[k] += (r[k] - shift[k]).powi(2);
            }
        }
        let scale = var.iter().map(|v| (v / n).sqrt()).map(|s| if s > 0.0 { s } else { 1.0 }).collect();
        Self { shift, scale }
    }

    /// Maps `[lo, hi]` per coordinate onto `[−1, 1]`.
    pub fn from_bounds(lo: &[f64], hi: &[f64]) -> Self {
        let shift = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let scale = lo.iter().zip(hi).map(|(a, b)| if b > a { 0.5 * (b - a) } else { 1.0 }).collect();
        Self { shift, scale }
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn is_invertible(&self) -> bool {
        self.scale.iter().all(|s| *s != 0.0 && s.is_finite()) && self.shift.iter().all(|s| s.is_finite())
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.shift).zip(&self.scale).map(|((v, m), s)| (v - m) / s).collect()
    }

    pub fn inverse(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(&self.shift).zip(&self.scale).map(|((v, m), s)| v * s + m).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub input: Affine,
    pub output: Affine,
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let xs = x.chunks_exact(4);
    let ys = y.chunks_exact(4);
    let tail: f64 = xs.remainder().iter().zip(ys.remainder()).map(|(a, b)| a * b).sum();
    for (a, b) in xs.zip(ys) {
        for k in 0..4 {
            acc[k] += a[k] * b[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// One dense layer. `w` is `fan_in × fan_out`, so a batch of row vectors
/// maps as `A · w + b`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Dense {
    pub w: DMatrix<f64>,
    pub b: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "MlpDocument", try_from = "MlpDocument")]
pub struct MlpSurrogate {
    pub spec: MlpSpec,
    pub normalizer: Normalizer,
    /// Set when the network is used as a joint law.
    pub kind: Option<ActuationKind>,
    pub(crate) layers: Vec<Dense>,
}

impl MlpSurrogate {
    /// He-uniform weights, zero biases, identity normalization.
    pub fn init(spec: &MlpSpec) -> Result<Self, MlpError> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let layers = spec
            .widths()
            .windows(2)
            .map(|w| {
                let limit = (6.0 / w[0] as f64).sqrt();
                Dense {
                    w: DMatrix::from_fn(w[0], w[1], |_, _| rng.random_range(-limit..limit)),
                    b: DVector::zeros(w[1]),
                }
            })
            .collect();
        Ok(Self {
            spec: spec.clone(),
            normalizer: Normalizer { input: Affine::identity(spec.input_dim), output: Affine::identity(spec.output_dim) },
            kind: None,
            layers,
        })
    }

    pub fn with_kind(mut self, kind: ActuationKind) -> Self {
        self.kind = Some(kind);
        self
    }

    pub fn parameter_count(&self) -> usize {
        self.spec.parameter_count()
    }

    /// Forward pass in normalized units for a batch (rows are samples).
    /// Returns the pre-activations of every layer and the post-activations
    /// feeding each layer (the first entry is the input itself).
    pub(crate) fn forward_batch(&self, x: &DMatrix<f64>) -> (Vec<DMatrix<f64>>, Vec<DMatrix<f64>>) {
        let mut acts = vec![x.clone()];
        let mut pre = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = acts.last().expect("input present") * &layer.w;
            for (j, bj) in layer.b.iter().enumerate() {
                z.column_mut(j).add_scalar_mut(*bj);
            }
            if i + 1 < self.layers.len() {
                acts.push(z.map(|v| v.max(0.0)));
            }
            pre.push(z);
        }
        (pre, acts)
    }

    /// Single-sample forward pass in normalized units.
    fn forward_one(&self, z_in: &[f64]) -> Vec<f64> {
        let mut a = z_in.to_vec();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let rows = layer.w.nrows();
            let next = layer
                .w
                .as_slice()
                .chunks_exact(rows)
                .zip(layer.b.iter())
                .map(|(col, b)| {
                    let s = b + dot(&a, col);
                    if i == last { s } else { s.max(0.0) }
                })
                .collect();
            a = next;
        }
        a
    }

    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>, MlpError> {
        if x.len() != self.spec.input_dim {
            return Err(MlpError::DimensionMismatch { expected: self.spec.input_dim, got: x.len() });
        }
        let z = self.normalizer.input.forward(x);
        Ok(self.normalizer.output.inverse(&self.forward_one(&z)))
    }

    /// Scalar convenience for single-output networks.
    pub fn predict_scalar(&self, x: &[f64]) -> Result<f64, MlpError> {
        Ok(self.predict(x)?[0])
    }

    pub fn predict_batch(&self, xs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, MlpError> {
        xs.iter().map(|x| self.predict(x)).collect()
    }

    /// Normalized-unit MSE loss and its parameter gradients for a batch.
    /// Gradients come back layer by layer as `(dW, db)`.
    pub(crate) fn loss_and_grad(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> (f64, Vec<(DMatrix<f64>, DVector<f64>)>) {
        let (pre, acts) = self.forward_batch(x);
        let out = pre.last().expect("at least one layer");
        let diff = out - y;
        let count = diff.len() as f64;
        let loss = diff.norm_squared() / count;
        let mut delta = diff * (2.0 / count);
        let mut grads = Vec::with_capacity(self.layers.len());
        for i in (0..self.layers.len()).rev() {
            let a_in = &acts[i];
            let dw = a_in.tr_mul(&delta);
            let db = DVector::from_iterator(delta.ncols(), delta.column_iter().map(|c| c.sum()));
            if i > 0 {
                let mut back = &delta * self.layers[i].w.transpose();
                back.zip_apply(&pre[i - 1], |d, z| {
                    if z <= 0.0 {
                        *d = 0.0;
                    }
                });
                delta = back;
            }
            grads.push((dw, db));
        }
        grads.reverse();
        (loss, grads)
    }

    fn params_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.parameter_count());
        for l in &self.layers {
            v.extend(l.w.iter());
            v.extend(l.b.iter());
        }
        v
    }

    fn set_params_flat(&mut self, v: &[f64]) {
        let mut k = 0;
        for l in &mut self.layers {
            for w in l.w.iter_mut() {
                *w = v[k];
                k += 1;
            }
            for b in l.b.iter_mut() {
                *b = v[k];
                k += 1;
            }
        }
    }
}

/// Coefficient of determination `1 − SS_res / SS_tot`.
pub fn r_squared(predictions: &[f64], targets: &[f64]) -> Result<f64, MlpError> {
    if predictions.len() != targets.len() {
        return Err(MlpError::DimensionMismatch { expected: targets.len(), got: predictions.len() });
    }
    if targets.len() < 2 {
        return Err(MlpError::TooFewPoints(targets.len()));
    }
    let mean = targets.iter().sum::<f64>() / targets.len() as f64;
    let ss_tot: f64 = targets.iter().map(|y| (y - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(MlpError::ZeroVariance);
    }
    let ss_res: f64 = predictions.iter().zip(targets).map(|(p, y)| (y - p).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Max relative deviation between backprop and central-difference gradients
/// of the normalized-unit MSE at one sample. The step is applied to each
/// parameter directly.
pub fn gradient_check(m: &MlpSurrogate, x: &[f64], y: &[f64]) -> Result<f64, MlpError> {
    if x.len() != m.spec.input_dim {
        return Err(MlpError::DimensionMismatch { expected: m.spec.input_dim, got: x.len() });
    }
    if y.len() != m.spec.output_dim {
        return Err(MlpError::DimensionMismatch { expected: m.spec.output_dim, got: y.len() });
    }
    let xn = DMatrix::from_row_slice(1, x.len(), &m.normalizer.input.forward(x));
    let yn = DMatrix::from_row_slice(1, y.len(), &m.normalizer.output.forward(y));
    let (_, grads) = m.loss_and_grad(&xn, &yn);
    let mut analytic: Vec<f64> = Vec::with_capacity(m.parameter_count());
    for (dw, db) in &grads {
        analytic.extend(dw.iter());
        analytic.extend(db.iter());
    }

    let h = 1e-5;
    let base = m.params_flat();
    let mut probe = m.clone();
    let loss_at = |probe: &MlpSurrogate| {
        let out = probe.forward_batch(&xn).0.pop().expect("output layer");
        (out - &yn).norm_squared() / yn.len() as f64
    };
    let mut worst: f64 = 0.0;
    let mut params = base.clone();
    for k in 0..base.len() {
        params[k] = base[k] + h;
        probe.set_params_flat(&params);
        let up = loss_at(&probe);
        params[k] = base[k] - h;
        probe.set_params_flat(&params);
        let down = loss_at(&probe);
        params[k] = base[k];
        let fd = (up - down) / (2.0 * h);
        let a = analytic[k];
        let denom = a.abs().max(fd.abs()).max(1e-6);
        worst = worst.max((a - fd).abs() / denom);
    }
    Ok(worst)
}

pub const MLP_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Serialize, Deserialize)]
struct LayerDoc {
    fan_in: usize,
    fan_out: usize,
    /// Row-major `fan_out × fan_in`.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

#[derive(Clone, Serialize, Deserialize)]
struct MlpDocument {
    format_version: u32,
    model: String,
    spec: MlpSpec,
    activation: String,
    #[serde(default)]
    kind: Option<ActuationKind>,
    normalizer: Normalizer,
    layers: Vec<LayerDoc>,
}

impl From<MlpSurrogate> for MlpDocument {
    fn from(m: MlpSurrogate) -> Self {
        MlpDocument {
            format_version: MLP_FORMAT_VERSION,
            model: "mlp".into(),
            spec: m.spec,
            activation: "relu".into(),
            kind: m.kind,
            normalizer: m.normalizer,
            layers: m
                .layers
                .into_iter()
                .map(|l| LayerDoc {
                    fan_in: l.w.nrows(),
                    fan_out: l.w.ncols(),
                    // column-major fan_in × fan_out is row-major fan_out × fan_in
                    weights: l.w.as_slice().to_vec(),
                    bias: l.b.as_slice().to_vec(),
                })
                .collect(),
        }
    }
}

impl TryFrom<MlpDocument> for MlpSurrogate {
    type Error = MlpError;

    fn try_from(doc: MlpDocument) -> Result<Self, MlpError> {
        if doc.format_version != MLP_FORMAT_VERSION || doc.model != "mlp" || doc.activation != "relu" {
            return Err(MlpError::Format(format!("unsupported document (model `{}`, version {})", doc.model, doc.format_version)));
        }
        doc.spec.validate()?;
        let widths = doc.spec.widths();
        if doc.layers.len() != widths.len() - 1 {
            return Err(MlpError::Format("layer count disagrees with spec".into()));
        }
        let mut layers = Vec::with_capacity(doc.layers.len());
        for (l, w) in doc.layers.into_iter().zip(widths.windows(2)) {
            if l.fan_in != w[0] || l.fan_out != w[1] || l.weights.len() != w[0] * w[1] || l.bias.len() != w[1] {
                return Err(MlpError::Format("layer shape disagrees with spec".into()));
            }
            layers.push(Dense { w: DMatrix::from_vec(w[0], w[1], l.weights), b: DVector::from_vec(l.bias) });
        }
        let n = &doc.normalizer;
        if n.input.dim() != doc.spec.input_dim || n.output.dim() != doc.spec.output_dim {
            return Err(MlpError::Format("normalizer dimension disagrees with spec".into()));
        }
        if !n.input.is_invertible() || !n.output.is_invertible() {
            return Err(MlpError::Format("normalizer has a zero or non-finite scale".into()));
        }
        Ok(Self { spec: doc.spec, normalizer: doc.normalizer, kind: doc.kind, layers })
    }
}

impl MlpSurrogate {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, MlpError> {
        serde_json::from_str(text).map_err(|e| MlpError::Format(e.to_string()))
    }
}

#[cfg(test)]
mod tests;
