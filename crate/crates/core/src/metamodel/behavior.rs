use serde::{Deserialize, Serialize};

use super::{DesignFamily, MetaConfig, MetaError, META_FORMAT_VERSION};
use crate::domain::{ActuationKind, ModuleDesign};
use crate::mlp::{train, Affine, MlpSpec, MlpSurrogate, TrainConfig};
use crate::oracle::SampleSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorReport {
    pub train_r2: Option<f64>,
    pub holdout_r2: Option<f64>,
    pub train_rmse: f64,
    pub rows: usize,
}

/// `(design…, p, u) → τ` for one joint axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorMetaModel {
    pub axis: String,
    pub kind: ActuationKind,
    pub family: DesignFamily,
    pub mlp: MlpSurrogate,
    /// Sampled `(p_min, p_max)` and `(u_min, u_max)` over the whole family.
    pub actuation_range: (f64, f64),
    pub deformation_range: (f64, f64),
    pub guard: bool,
    pub report: BehaviorReport,
}

impl BehaviorMetaModel {
    pub fn predict(&self, d: &ModuleDesign, p: f64, u: f64) -> f64 {
        let mut x = self.family.features(d);
        x.push(p);
        x.push(u);
        self.mlp.predict_scalar(&x).expect("input width matches family")
    }

    /// Predictions for many `(p, u)` at one design.
    pub fn predict_many(&self, d: &ModuleDesign, points: &[(f64, f64)]) -> Vec<f64> {
        points.iter().map(|&(p, u)| self.predict(d, p, u)).collect()
    }

    pub fn check_design(&self, d: &ModuleDesign) -> Result<(), MetaError> {
        if self.guard {
            self.family.check_hull(d)?;
        }
        Ok(())
    }
}

/// One behavior network per characterized axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorMetaModels {
    pub format_version: u32,
    pub axes: Vec<BehaviorMetaModel>,
}

impl BehaviorMetaModels {
    pub fn axis(&self, label: &str) -> Option<&BehaviorMetaModel> {
        self.axes.iter().find(|a| a.axis == label)
    }

    pub fn labels(&self) -> Vec<&str> {
        self.axes.iter().map(|a| a.axis.as_str()).collect()
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

/// Pools every design's samples per axis and trains one network per axis.
/// `sets[i]` holds the sample sets (one per axis) of `family.designs[i]`.
pub fn fit_behavior_metamodel(
    family: &DesignFamily,
    sets: &[Vec<SampleSet>],
    cfg: &MetaConfig,
) -> Result<BehaviorMetaModels, MetaError> {
    if sets.len() != family.len() {
        return Err(MetaError::LengthMismatch { expected: family.len(), got: sets.len() });
    }
    let labels: Vec<String> = sets[0].iter().map(|s| s.axis_label.clone()).collect();
    let kind = sets[0].first().map(|s| s.kind).ok_or_else(|| MetaError::MissingAxis {
        design: family.id(0),
        axis: "<any>".into(),
    })?;
    for (i, per_design) in sets.iter().enumerate() {
        for label in &labels {
            let n = per_design.iter().filter(|s| &s.axis_label == label).count();
            if n != 1 {
                return Err(MetaError::MissingAxis { design: family.id(i), axis: label.clone() });
            }
        }
        if per_design.iter().any(|s| s.kind != kind) {
            return Err(MetaError::KindMismatch);
        }
    }

    let mut axes = Vec::with_capacity(labels.len());
    for (a, label) in labels.iter().enumerate() {
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        for (d, per_design) in family.designs.iter().zip(sets) {
            let set = per_design.iter().find(|s| &s.axis_label == label).expect("checked above");
            let features = family.features(d);
            for r in &set.records {
                let mut x = features.clone();
                x.push(r.p);
                x.push(r.u);
                inputs.push(x);
                outputs.push(vec![r.tau]);
            }
        }
        let col_range = |k: usize| {
            inputs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x: &Vec<f64>| (lo.min(x[k]), hi.max(x[k])))
        };
        let nf = family.varying.len();
        let p_range = col_range(nf);
        let u_range = col_range(nf + 1);
        let (mut lo, mut hi): (Vec<f64>, Vec<f64>) = family.bounds().into_iter().unzip();
        lo.extend([p_range.0, u_range.0]);
        hi.extend([p_range.1, u_range.1]);

        let spec = MlpSpec::new(nf + 2, cfg.hidden.clone(), 1, cfg.seed.wrapping_add(a as u64))?;
        let train_cfg = TrainConfig { input_normalizer: Some(Affine::from_bounds(&lo, &hi)), ..cfg.train.clone() };
        let (mlp, hist) = train(&spec, &inputs, &outputs, &train_cfg)?;
        axes.push(BehaviorMetaModel {
            axis: label.clone(),
            kind,
            family: family.clone(),
            mlp: mlp.with_kind(kind),
            actuation_range: p_range,
            deformation_range: u_range,
            guard: cfg.guard,
            report: BehaviorReport {
                train_r2: hist.train_r2[0],
                holdout_r2: hist.holdout_r2[0],
                train_rmse: hist.train_rmse[0],
                rows: inputs.len(),
            },
        });
    }
    Ok(BehaviorMetaModels { format_version: META_FORMAT_VERSION, axes })
}
