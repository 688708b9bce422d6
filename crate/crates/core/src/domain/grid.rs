use serde::{Deserialize, Serialize};

use super::DomainError;

// Guards against (max - min) / step landing a hair below an integer.
const COUNT_EPS: f64 = 1e-9;

/// Evenly spaced levels `min, min + step, ...` up to `max`.
///
/// The level count is `floor((max - min) / step) + 1`; `max` itself is only
/// part of the sequence when the range is an exact multiple of `step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Sweep {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self, DomainError> {
        let s = Self { min, max, step };
        s.validate()?;
        Ok(s)
    }

    pub fn single(value: f64) -> Self {
        Self { min: value, max: value, step: 1.0 }
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if !(self.min.is_finite() && self.max.is_finite() && self.step.is_finite()) {
            return Err(DomainError::InvalidGrid("non-finite sweep bound".into()));
        }
        if self.step <= 0.0 {
            return Err(DomainError::InvalidGrid(format!("step must be positive, got {}", self.step)));
        }
        if self.max < self.min {
            return Err(DomainError::InvalidGrid(format!(
                "max {} below min {}",
                self.max, self.min
            )));
        }
        Ok(())
    }

    pub fn count(&self) -> usize {
        ((self.max - self.min) / self.step + COUNT_EPS).floor() as usize + 1
    }

    pub fn levels(&self) -> Vec<f64> {
        (0..self.count())
            .map(|i| (self.min + i as f64 * self.step).min(self.max))
            .collect()
    }
}

/// Actuation × external-effort sampling plan for one characterized axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub actuation: Sweep,
    pub external: Sweep,
    pub axis_label: String,
}

impl SampleGrid {
    pub fn new(actuation: Sweep, external: Sweep, axis_label: impl Into<String>) -> Result<Self, DomainError> {
        actuation.validate()?;
        external.validate()?;
        Ok(Self { actuation, external, axis_label: axis_label.into() })
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        self.actuation.validate()?;
        self.external.validate()
    }
}

/// Cartesian product of actuation and external levels, actuation outermost.
pub fn enumerate_grid(g: &SampleGrid) -> Vec<(f64, f64)> {
    let ext = g.external.levels();
    g.actuation
        .levels()
        .into_iter()
        .flat_map(|p| ext.iter().map(move |&m| (p, m)))
        .collect()
}
