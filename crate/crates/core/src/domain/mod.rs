//! Shared value types: module geometry, sampling grids, curves and samples.
//!
//! Units are fixed per field and never carried at runtime: lengths in mm,
//! pressure in kPa, forces in N, moments in N·m, angles in rad.

mod curve;
mod design;
mod grid;
mod sample;

pub use curve::Curve3;
pub use design::{validate_design, DesignParam, ModuleDesign, DESIGN_TOLERANCE_MM};
pub use grid::{enumerate_grid, SampleGrid, Sweep};
pub use sample::{ActuationKind, Condition, SampleRecord};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DomainError {
    #[error("design parameter {field} must be positive and finite, got {value}")]
    NonPositiveDesign { field: &'static str, value: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("unknown {0}")]
    UnknownToken(String),
}
