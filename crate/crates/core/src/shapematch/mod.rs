//! Shape-matching co-design: fit a segmented actuator's deformed centerline
//! to a 3D target curve.

mod bundle;
mod design;
mod search;
mod structure;
mod target;

pub use bundle::{read_best_design, write_bundle, BUNDLE_FILES};
pub use design::{ActuatorDesign, DesignSpace, MetaLaws, SegmentDesign, SimSettings};
pub(crate) use search::axis_law;
pub use search::{
    evaluate_design, optimize_design, refit_and_verify, CandidateResult, MatchResult, RefitModel, RefitReport, ShapeConfig,
    ShapeMatchOutcome,
};
pub use structure::{enumerate_structures, StructuralCandidate, StructureConfig};
pub use target::{match_metrics, resample_target, BaseFrame, Handedness, MatchMetrics, ShapeDescriptor, TargetShape, TargetSpec};

use crate::domain::DomainError;
use crate::metamodel::MetaError;
use crate::mlp::MlpError;
use crate::oracle::OracleError;
use crate::polyfit::PolyfitError;
use crate::prbm::PrbmError;

#[derive(Debug, thiserror::Error)]
pub enum ShapeError {
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),
    #[error("curves have {0} and {1} points")]
    LengthMismatch(usize, usize),
    #[error("infeasible module-count bounds: {0}")]
    InfeasibleBounds(String),
    #[error("invalid shape-matching setup: {0}")]
    InvalidConfig(String),
    #[error("no candidate produced a valid simulation")]
    AllCandidatesFailed,
    #[error(transparent)]
    Simulation(#[from] PrbmError),
    #[error(transparent)]
    Meta(#[from] MetaError),
    #[error(transparent)]
    Polyfit(#[from] PolyfitError),
    #[error(transparent)]
    Mlp(#[from] MlpError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("bundle format: {0}")]
    Format(String),
}

impl From<DomainError> for ShapeError {
    fn from(e: DomainError) -> Self {
        ShapeError::DegenerateCurve(e.to_string())
    }
}
