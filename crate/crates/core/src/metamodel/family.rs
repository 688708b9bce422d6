use std::fmt;

use serde::{Deserialize, Serialize};

use super::MetaError;
use crate::domain::{validate_design, DesignParam, ModuleDesign};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamLevels {
    pub param: DesignParam,
    pub levels: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedValue {
    pub param: DesignParam,
    pub value: f64,
}

/// Extra admissibility predicate on top of the wall condition every design
/// must meet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Constraint {
    Always,
    Never,
    /// `R − r ≥ l/4`.
    Wall,
    /// `Σ coeffs_k · [r, R, l, t]_k ≥ rhs`.
    Linear { coeffs: [f64; 4], rhs: f64 },
    AllOf { all: Vec<Constraint> },
}

impl Constraint {
    pub fn holds(&self, d: &ModuleDesign) -> bool {
        match self {
            Constraint::Always => true,
            Constraint::Never => false,
            Constraint::Wall => validate_design(d),
            Constraint::Linear { coeffs, rhs } => {
                let lhs: f64 = DesignParam::ALL.iter().zip(coeffs).map(|(p, c)| c * d.get(*p)).sum();
                lhs >= rhs - 1e-9
            }
            Constraint::AllOf { all } => all.iter().all(|c| c.holds(d)),
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Always => write!(f, "true"),
            Constraint::Never => write!(f, "false"),
            Constraint::Wall => write!(f, "R - r >= l/4"),
            Constraint::Linear { coeffs, rhs } => {
                let terms: Vec<String> = DesignParam::ALL
                    .iter()
                    .zip(coeffs)
                    .filter(|(_, c)| **c != 0.0)
                    .map(|(p, c)| format!("{c}*{}", p.symbol()))
                    .collect();
                write!(f, "{} >= {rhs}", if terms.is_empty() { "0".into() } else { terms.join(" + ") })
            }
            Constraint::AllOf { all } => {
                let parts: Vec<String> = all.iter().map(|c| format!("({c})")).collect();
                write!(f, "{}", if parts.is_empty() { "true".into() } else { parts.join(" and ") })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignFamily {
    pub varying: Vec<ParamLevels>,
    pub fixed: Vec<FixedValue>,
    pub constraint: Constraint,
    pub designs: Vec<ModuleDesign>,
}

/// Cartesian product of the varying levels (first parameter outermost),
/// filtered by the wall condition and `constraint`.
pub fn build_family(
    varying: Vec<ParamLevels>,
    fixed: Vec<FixedValue>,
    constraint: Constraint,
) -> Result<DesignFamily, MetaError> {
    let mut seen = Vec::new();
    for p in varying.iter().map(|v| v.param).chain(fixed.iter().map(|f| f.param)) {
        if seen.contains(&p) {
            return Err(MetaError::InvalidFamily(format!("{} listed twice", p.symbol())));
        }
        seen.push(p);
    }
    if let Some(missing) = DesignParam::ALL.iter().find(|p| !seen.contains(p)) {
        return Err(MetaError::InvalidFamily(format!("{} is neither varying nor fixed", missing.symbol())));
    }
    for v in &varying {
        if v.levels.is_empty() || v.levels.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(MetaError::InvalidFamily(format!("{} needs positive finite levels", v.param.symbol())));
        }
    }
    for f in &fixed {
        if !(f.value.is_finite() && f.value > 0.0) {
            return Err(MetaError::InvalidFamily(format!("{} must be positive", f.param.symbol())));
        }
    }

    let mut base = ModuleDesign { r: 1.0, big_r: 1.0, l: 1.0, t: 1.0 };
    for f in &fixed {
        base.set(f.param, f.value);
    }
    let mut designs = vec![base];
    for v in &varying {
        designs = designs
            .into_iter()
            .flat_map(|d| {
                v.levels.iter().map(move |&x| {
                    let mut d = d;
                    d.set(v.param, x);
                    d
                })
            })
            .collect();
    }
    designs.retain(|d| validate_design(d) && constraint.holds(d));
    if designs.is_empty() {
        return Err(MetaError::EmptyFamily);
    }
    Ok(DesignFamily { varying, fixed, constraint, designs })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

impl DesignFamily {
    pub fn len(&self) -> usize {
        self.designs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.designs.is_empty()
    }

    pub fn id(&self, index: usize) -> String {
        format!("d{index:03}")
    }

    pub fn varying_params(&self) -> Vec<DesignParam> {
        self.varying.iter().map(|v| v.param).collect()
    }

    /// Values of the varying parameters, in family order.
    pub fn features(&self, d: &ModuleDesign) -> Vec<f64> {
        self.varying.iter().map(|v| d.get(v.param)).collect()
    }

    /// Per varying parameter `(min level, max level)`.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.varying
            .iter()
            .map(|v| v.levels.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(*x), hi.max(*x))))
            .collect()
    }

    pub fn bounds_of(&self, param: DesignParam) -> Option<(f64, f64)> {
        self.varying.iter().position(|v| v.param == param).map(|i| self.bounds()[i])
    }

    /// Interpolation guard: varying parameters inside their level range and
    /// fixed parameters at their fixed value.
    pub fn check_hull(&self, d: &ModuleDesign) -> Result<(), MetaError> {
        for (v, (lo, hi)) in self.varying.iter().zip(self.bounds()) {
            let x = d.get(v.param);
            if !(x >= lo - 1e-9 && x <= hi + 1e-9) {
                return Err(MetaError::Extrapolation { param: v.param, value: x, lo, hi });
            }
        }
        for f in &self.fixed {
            let x = d.get(f.param);
            if !close(x, f.value) {
                return Err(MetaError::Extrapolation { param: f.param, value: x, lo: f.value, hi: f.value });
            }
        }
        Ok(())
    }

    pub fn index_of(&self, d: &ModuleDesign) -> Option<usize> {
        self.designs
            .iter()
            .position(|e| DesignParam::ALL.iter().all(|p| close(e.get(*p), d.get(*p))))
    }

    /// Text manifest: levels, fixed values, constraint expression and the
    /// filtered designs with stable IDs.
    pub fn to_manifest(&self) -> String {
        #[derive(Serialize)]
        struct Entry<'a> {
            id: String,
            #[serde(flatten)]
            design: &'a ModuleDesign,
        }
        #[derive(Serialize)]
        struct Manifest<'a> {
            format_version: u32,
            varying: &'a [ParamLevels],
            fixed: &'a [FixedValue],
            constraint: &'a Constraint,
            constraint_expression: String,
            design_count: usize,
            designs: Vec<Entry<'a>>,
        }
        let m = Manifest {
            format_version: super::META_FORMAT_VERSION,
            varying: &self.varying,
            fixed: &self.fixed,
            constraint: &self.constraint,
            constraint_expression: format!("(R - r >= l/4) and ({})", self.constraint),
            design_count: self.designs.len(),
            designs: self.designs.iter().enumerate().map(|(i, d)| Entry { id: self.id(i), design: d }).collect(),
        };
        serde_json::to_string_pretty(&m).expect("manifest serializes")
    }

    /// Rebuilds the family from a manifest and checks that the stored design
    /// list matches the enumeration.
    pub fn from_manifest(text: &str) -> Result<Self, MetaError> {
        #[derive(Deserialize)]
        struct Manifest {
            varying: Vec<ParamLevels>,
            fixed: Vec<FixedValue>,
            constraint: Constraint,
            designs: Vec<ModuleDesign>,
        }
        let m: Manifest = serde_json::from_str(text).map_err(|e| MetaError::Format(e.to_string()))?;
        let fam = build_family(m.varying, m.fixed, m.constraint)?;
        if fam.designs != m.designs {
            return Err(MetaError::Format("design list does not match the enumeration".into()));
        }
        Ok(fam)
    }

    /// The helical-actuator grid: `R ∈ {5, 5.5, 6, 6.5, 7}`, `l ∈ {4, …, 6}`, r = 3, t = 1.5.
    pub fn helical_grid() -> Result<Self, MetaError> {
        build_family(
            vec![
                ParamLevels { param: DesignParam::AverageRadius, levels: vec![5.0, 5.5, 6.0, 6.5, 7.0] },
                ParamLevels { param: DesignParam::Length, levels: vec![4.0, 4.5, 5.0, 5.5, 6.0] },
            ],
            vec![
                FixedValue { param: DesignParam::InnerRadius, value: 3.0 },
                FixedValue { param: DesignParam::Thickness, value: 1.5 },
            ],
            Constraint::Always,
        )
    }
}
