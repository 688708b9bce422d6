use serde::{Deserialize, Serialize};

use super::{DesignFamily, MetaConfig, MetaError, META_FORMAT_VERSION};
use crate::domain::{ActuationKind, ModuleDesign};
use crate::mlp::{r_squared, train, Affine, MlpSpec, MlpSurrogate, TrainConfig};
use crate::polyfit::{FiveCoefficients, PolySurrogate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffMetaReport {
    /// In `(m_a, b_a, m_e, b_e, k_n)` order; `None` for coefficients that are
    /// constant across the family.
    pub r2: [Option<f64>; 5],
    /// R² over all non-constant coefficients in standardized units.
    pub pooled_r2: Option<f64>,
    pub max_relative_error: f64,
    pub designs: usize,
}

/// Maps design parameters to the five polynomial coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffMetaModel {
    pub format_version: u32,
    pub kind: ActuationKind,
    pub family: DesignFamily,
    pub mlp: MlpSurrogate,
    /// Coefficients identical across every training design are reproduced
    /// exactly instead of through the network.
    pub pinned: [Option<f64>; 5],
    pub guard: bool,
    pub report: CoeffMetaReport,
    pub train_config: TrainConfig,
}

pub fn fit_coeff_metamodel(
    family: &DesignFamily,
    surrogates: &[PolySurrogate],
    cfg: &MetaConfig,
) -> Result<CoeffMetaModel, MetaError> {
    if surrogates.len() != family.len() {
        return Err(MetaError::LengthMismatch { expected: family.len(), got: surrogates.len() });
    }
    let kind = surrogates[0].kind;
    if surrogates.iter().any(|s| s.kind != kind) {
        return Err(MetaError::KindMismatch);
    }
    let coeffs: Vec<[f64; 5]> = surrogates
        .iter()
        .enumerate()
        .map(|(i, s)| s.coefficients().map(|c| c.to_array()).ok_or_else(|| MetaError::NotFiveCoefficient(family.id(i))))
        .collect::<Result<_, _>>()?;
    let inputs: Vec<Vec<f64>> = family.designs.iter().map(|d| family.features(d)).collect();
    let outputs: Vec<Vec<f64>> = coeffs.iter().map(|c| c.to_vec()).collect();

    let (lo, hi): (Vec<f64>, Vec<f64>) = family.bounds().into_iter().unzip();
    let spec = MlpSpec::new(inputs[0].len(), cfg.hidden.clone(), 5, cfg.seed)?;
    let train_cfg = TrainConfig { input_normalizer: Some(Affine::from_bounds(&lo, &hi)), ..cfg.train.clone() };
    let (mlp, _) = train(&spec, &inputs, &outputs, &train_cfg)?;

    let pinned: [Option<f64>; 5] = std::array::from_fn(|k| {
        let first = coeffs[0][k];
        coeffs.iter().all(|c| c[k] == first).then_some(first)
    });
    let mut model = CoeffMetaModel {
        format_version: META_FORMAT_VERSION,
        kind,
        family: family.clone(),
        mlp,
        pinned,
        guard: cfg.guard,
        report: CoeffMetaReport { r2: [None; 5], pooled_r2: None, max_relative_error: 0.0, designs: family.len() },
        train_config: train_cfg,
    };

    let preds: Vec<[f64; 5]> = family.designs.iter().map(|d| model.predict_unchecked(d).to_array()).collect();
    let mut res_std = 0.0;
    let mut tot_std = 0.0;
    for k in 0..5 {
        if pinned[k].is_some() {
            continue;
        }
        let p: Vec<f64> = preds.iter().map(|c| c[k]).collect();
        let t: Vec<f64> = coeffs.iter().map(|c| c[k]).collect();
        model.report.r2[k] = r_squared(&p, &t).ok();
        let mean = t.iter().sum::<f64>() / t.len() as f64;
        let var: f64 = t.iter().map(|y| (y - mean).powi(2)).sum();
        if var > 0.0 {
            res_std += p.iter().zip(&t).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / var;
            tot_std += 1.0;
        }
    }
    model.report.pooled_r2 = (tot_std > 0.0).then(|| 1.0 - res_std / tot_std);
    model.report.max_relative_error = preds
        .iter()
        .zip(&coeffs)
        .flat_map(|(p, t)| p.iter().zip(t).map(|(a, b)| if *b == 0.0 { (a - b).abs() } else { ((a - b) / b).abs() }))
        .fold(0.0, f64::max);
    Ok(model)
}

impl CoeffMetaModel {
    /// Network prediction without the hull check.
    pub fn predict_unchecked(&self, d: &ModuleDesign) -> FiveCoefficients {
        let out = self.mlp.predict(&self.family.features(d)).expect("feature count matches family");
        let arr: [f64; 5] = std::array::from_fn(|k| self.pinned[k].unwrap_or(out[k]));
        FiveCoefficients::from_array(arr)
    }

    pub fn predict(&self, d: &ModuleDesign) -> Result<FiveCoefficients, MetaError> {
        if self.guard {
            self.family.check_hull(d)?;
        }
        Ok(self.predict_unchecked(d))
    }

    /// Surrogate for a (possibly unseen) design inside the family hull.
    pub fn instantiate(&self, d: &ModuleDesign) -> Result<PolySurrogate, MetaError> {
        Ok(PolySurrogate::from_coefficients(self.predict(d)?, self.kind))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("meta-model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, MetaError> {
        let m: Self = serde_json::from_str(text).map_err(|e| MetaError::Format(e.to_string()))?;
        if m.format_version != META_FORMAT_VERSION {
            return Err(MetaError::Format(format!("unsupported version {}", m.format_version)));
        }
        Ok(m)
    }
}
