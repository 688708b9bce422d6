use serde::{Deserialize, Serialize};

use super::DomainError;

/// Absolute slack (mm) applied to the wall-thickness manufacturability check.
pub const DESIGN_TOLERANCE_MM: f64 = 1e-9;

/// Geometry of a single bellow module. All lengths in millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModuleDesign {
    /// Inner radius.
    pub r: f64,
    /// Average radius.
    #[serde(rename = "R")]
    pub big_r: f64,
    /// Module length along the chain axis.
    pub l: f64,
    /// Wall thickness.
    pub t: f64,
}

impl ModuleDesign {
    pub fn new(r: f64, big_r: f64, l: f64, t: f64) -> Result<Self, DomainError> {
        let d = Self { r, big_r, l, t };
        d.check_positive()?;
        Ok(d)
    }

    pub fn check_positive(&self) -> Result<(), DomainError> {
        for (name, v) in [("r", self.r), ("R", self.big_r), ("l", self.l), ("t", self.t)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(DomainError::NonPositiveDesign { field: name, value: v });
            }
        }
        Ok(())
    }

    /// Manufacturability predicate `R - r >= l/4`.
    pub fn is_valid(&self) -> bool {
        validate_design(self)
    }

    pub fn get(&self, param: DesignParam) -> f64 {
        match param {
            DesignParam::InnerRadius => self.r,
            DesignParam::AverageRadius => self.big_r,
            DesignParam::Length => self.l,
            DesignParam::Thickness => self.t,
        }
    }

    pub fn set(&mut self, param: DesignParam, value: f64) {
        match param {
            DesignParam::InnerRadius => self.r = value,
            DesignParam::AverageRadius => self.big_r = value,
            DesignParam::Length => self.l = value,
            DesignParam::Thickness => self.t = value,
        }
    }

    /// Shell volume of the module wall in mm³, used for mass estimates.
    pub fn wall_volume(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.big_r * self.t * self.l
    }
}

pub fn validate_design(d: &ModuleDesign) -> bool {
    d.big_r - d.r >= d.l / 4.0 - DESIGN_TOLERANCE_MM
}

/// Named geometric parameter of a [`ModuleDesign`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DesignParam {
    #[serde(rename = "r")]
    InnerRadius,
    #[serde(rename = "R")]
    AverageRadius,
    #[serde(rename = "l")]
    Length,
    #[serde(rename = "t")]
    Thickness,
}

impl DesignParam {
    pub const ALL: [DesignParam; 4] = [
        DesignParam::InnerRadius,
        DesignParam::AverageRadius,
        DesignParam::Length,
        DesignParam::Thickness,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            DesignParam::InnerRadius => "r",
            DesignParam::AverageRadius => "R",
            DesignParam::Length => "l",
            DesignParam::Thickness => "t",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.symbol() == s)
    }
}

impl std::fmt::Display for DesignParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.symbol())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_grid_design_is_valid() {
        let d = ModuleDesign::new(3.0, 5.0, 4.0, 1.5).unwrap();
        assert!(validate_design(&d));
    }

    #[test]
    fn degenerate_wall_is_invalid() {
        let d = ModuleDesign::new(3.0, 3.0, 4.0, 1.5).unwrap();
        assert!(!validate_design(&d));
    }

    #[test]
    fn boundary_equality_is_valid() {
        let d = ModuleDesign::new(3.0, 4.0, 4.0, 1.5).unwrap();
        assert!(validate_design(&d));
    }

    #[test]
    fn rejects_non_positive_fields() {
        assert!(ModuleDesign::new(0.0, 5.0, 4.0, 1.5).is_err());
        assert!(ModuleDesign::new(3.0, 5.0, -4.0, 1.5).is_err());
        assert!(ModuleDesign::new(3.0, 5.0, 4.0, f64::NAN).is_err());
    }

    #[test]
    fn symbols_round_trip() {
        for p in DesignParam::ALL {
            assert_eq!(DesignParam::from_symbol(p.symbol()), Some(p));
        }
    }
}
