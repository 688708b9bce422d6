use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DomainError;

/// What drives the actuator. Units: kPa for pressure, N for tendon force.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActuationKind {
    Pressure,
    #[serde(alias = "tendon")]
    TendonForce,
}

impl ActuationKind {
    /// Short token used in CSV metadata lines.
    pub fn token(self) -> &'static str {
        match self {
            ActuationKind::Pressure => "pressure",
            ActuationKind::TendonForce => "tendon",
        }
    }
}

impl fmt::Display for ActuationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for ActuationKind {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "pressure" => Ok(ActuationKind::Pressure),
            "tendon" | "tendon_force" => Ok(ActuationKind::TendonForce),
            other => Err(DomainError::UnknownToken(format!("actuation kind `{other}`"))),
        }
    }
}

/// Loading condition under which a sample was taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// Actuation swept, no external load.
    FreeLoading,
    /// Actuation held fixed while an external effort is applied.
    Constrained,
}

impl Condition {
    pub fn token(self) -> &'static str {
        match self {
            Condition::FreeLoading => "free",
            Condition::Constrained => "constrained",
        }
    }
}

impl FromStr for Condition {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "free" | "free_loading" => Ok(Condition::FreeLoading),
            "constrained" => Ok(Condition::Constrained),
            other => Err(DomainError::UnknownToken(format!("condition `{other}`"))),
        }
    }
}

/// One quasi-static actuation / deformation / effort sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    /// Actuation magnitude.
    pub p: f64,
    /// Deformation coordinate, signed (rad or mm).
    pub u: f64,
    /// Applied external effort.
    pub ext: f64,
    /// Net joint effort.
    pub tau: f64,
    pub condition: Condition,
}

impl SampleRecord {
    pub fn free(p: f64, u: f64) -> Self {
        Self { p, u, ext: 0.0, tau: 0.0, condition: Condition::FreeLoading }
    }

    pub fn constrained(p: f64, u: f64, ext: f64) -> Self {
        Self { p, u, ext, tau: -ext, condition: Condition::Constrained }
    }
}
