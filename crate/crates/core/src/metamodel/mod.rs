//! Design-conditioned surrogates: a network from design parameters to the
//! five polynomial coefficients, and per-axis networks from
//! `(design, p, u)` to the joint effort.

mod behavior;
mod coeff;
mod family;

pub use behavior::{fit_behavior_metamodel, BehaviorMetaModel, BehaviorMetaModels, BehaviorReport};
pub use coeff::{fit_coeff_metamodel, CoeffMetaModel, CoeffMetaReport};
pub use family::{build_family, Constraint, DesignFamily, FixedValue, ParamLevels};

use serde::{Deserialize, Serialize};

use crate::domain::DesignParam;
use crate::mlp::{MlpError, TrainConfig};
use crate::polyfit::PolyfitError;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MetaError {
    #[error("constraint leaves no valid design")]
    EmptyFamily,
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("expected {expected} entries (one per design), got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("design {design} has no samples for axis `{axis}`")]
    MissingAxis { design: String, axis: String },
    #[error("surrogate for design {0} is not the five-coefficient linear form")]
    NotFiveCoefficient(String),
    #[error("mixed actuation kinds in family data")]
    KindMismatch,
    #[error("{param} = {value} is outside the family range [{lo}, {hi}]")]
    Extrapolation { param: DesignParam, value: f64, lo: f64, hi: f64 },
    #[error(transparent)]
    Mlp(#[from] MlpError),
    #[error(transparent)]
    Polyfit(#[from] PolyfitError),
    #[error("meta-model document: {0}")]
    Format(String),
}

/// Network shape and training settings for a meta-model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetaConfig {
    pub hidden: Vec<usize>,
    pub seed: u64,
    pub train: TrainConfig,
    /// Refuse designs outside the family hull.
    pub guard: bool,
}

impl MetaConfig {
    /// Three hidden layers 64/64/32, full-batch Adam, every design used for training.
    pub fn coefficient_default() -> Self {
        Self {
            hidden: vec![64, 64, 32],
            seed: 0,
            train: TrainConfig {
                learning_rate: 3e-3,
                final_lr_fraction: 0.05,
                max_iterations: 3000,
                holdout_fraction: 0.0,
                ..TrainConfig::default()
            },
            guard: true,
        }
    }

    /// Two hidden layers of 64, mini-batch Adam with a decaying rate.
    pub fn behavior_default() -> Self {
        Self {
            hidden: vec![64, 64],
            seed: 0,
            train: TrainConfig {
                learning_rate: 3e-3,
                final_lr_fraction: 0.01,
                batch_size: 64,
                max_iterations: 150,
                holdout_fraction: 0.1,
                ..TrainConfig::default()
            },
            guard: true,
        }
    }
}

pub const META_FORMAT_VERSION: u32 = 1;
