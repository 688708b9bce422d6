use serde::{Deserialize, Serialize};

use super::CliError;
use crate::domain::ModuleDesign;
use crate::metamodel::{build_family, Constraint, DesignFamily, FixedValue, MetaConfig, ParamLevels};
use crate::mlp::TrainConfig;
use crate::oracle::{IngestConfig, SyntheticFamily};
use crate::polyfit::FitConfig;
use crate::prbm::SolverConfig;
use crate::shapematch::{RefitModel, ShapeConfig, StructureConfig, TargetSpec};

/// One declarative document shared by every command. Each command reads
/// its own table; absent tables take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Root of every random stream in the run.
    pub seed: u64,
    pub generate: GenerateConfig,
    pub ingest: IngestSection,
    pub fit_poly: FitConfig,
    pub fit_nn: FitNnConfig,
    pub fit_meta: FitMetaConfig,
    pub simulate: SimulateConfig,
    pub shapematch: ShapeMatchSection,
    pub report: ReportConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            generate: GenerateConfig::default(),
            ingest: IngestSection::default(),
            fit_poly: FitConfig::default(),
            fit_nn: FitNnConfig::default(),
            fit_meta: FitMetaConfig::default(),
            simulate: SimulateConfig::default(),
            shapematch: ShapeMatchSection::default(),
            report: ReportConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }
}

/// Built-in synthetic ground truths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Single bending axis, 0–15 kPa and 0–0.02 N·m.
    #[default]
    Gripper,
    /// Three axes for spherical joints.
    Helical,
    /// Tendon force 0–8 N, one axis.
    Tendon,
}

impl Preset {
    pub fn family(self) -> SyntheticFamily {
        match self {
            Preset::Gripper => SyntheticFamily::gripper(),
            Preset::Helical => SyntheticFamily::helical(),
            Preset::Tendon => SyntheticFamily::tendon(),
        }
    }
}

/// Either a built-in preset or a full ground-truth description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub preset: Preset,
    pub custom: Option<SyntheticFamily>,
    /// Multiplies every sweep step.
    pub step_factor: f64,
    /// Relative deformation noise.
    pub noise_std: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self { preset: Preset::default(), custom: None, step_factor: 1.0, noise_std: 0.0 }
    }
}

impl OracleSection {
    pub fn build(&self, seed: u64) -> Result<SyntheticFamily, CliError> {
        if !(self.step_factor > 0.0 && self.step_factor.is_finite()) {
            return Err(CliError::Validation(format!("step_factor must be positive, got {}", self.step_factor)));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(CliError::Validation(format!("noise_std must be non-negative, got {}", self.noise_std)));
        }
        let mut fam = self.custom.clone().unwrap_or_else(|| self.preset.family());
        if self.step_factor != 1.0 {
            fam = fam.with_step_factor(self.step_factor);
        }
        fam.noise_std = self.noise_std;
        fam.seed = seed;
        Ok(fam)
    }
}

/// Design family as levels, fixed values and constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// `R ∈ {5 … 7}`, `l ∈ {4 … 6}`, r = 3, t = 1.5.
    HelicalGrid,
    Grid {
        varying: Vec<ParamLevels>,
        fixed: Vec<FixedValue>,
        #[serde(default = "always")]
        constraint: Constraint,
    },
}

fn always() -> Constraint {
    Constraint::Always
}

impl FamilySpec {
    pub fn build(&self) -> Result<DesignFamily, CliError> {
        Ok(match self {
            FamilySpec::HelicalGrid => DesignFamily::helical_grid()?,
            FamilySpec::Grid { varying, fixed, constraint } => build_family(varying.clone(), fixed.clone(), constraint.clone())?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateConfig {
    pub preset: Preset,
    pub custom: Option<SyntheticFamily>,
    pub step_factor: f64,
    pub noise_std: f64,
    /// Single design; the ground truth's reference design when absent.
    pub design: Option<ModuleDesign>,
    /// Characterize every design of a family instead of one design.
    pub family: Option<FamilySpec>,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        let o = OracleSection::default();
        Self { preset: o.preset, custom: o.custom, step_factor: o.step_factor, noise_std: o.noise_std, design: None, family: None }
    }
}

impl GenerateConfig {
    pub fn oracle(&self) -> OracleSection {
        OracleSection { preset: self.preset, custom: self.custom.clone(), step_factor: self.step_factor, noise_std: self.noise_std }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestSection {
    pub kind: Option<crate::domain::ActuationKind>,
    pub design: Option<ModuleDesign>,
    pub axis: Option<String>,
}

impl IngestSection {
    pub fn to_ingest(&self) -> IngestConfig {
        IngestConfig { kind: self.kind, design: self.design, axis_label: self.axis.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitNnConfig {
    pub hidden: Vec<usize>,
    pub train: TrainConfig,
    /// Map the sampled `(p, u)` box onto `[−1, 1]²` before the first layer.
    pub box_inputs: bool,
}

impl Default for FitNnConfig {
    fn default() -> Self {
        Self {
            hidden: vec![64, 64],
            train: TrainConfig {
                learning_rate: 3e-3,
                final_lr_fraction: 0.05,
                batch_size: 32,
                max_iterations: 600,
                ..TrainConfig::default()
            },
            box_inputs: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetaMode {
    /// Per-axis `(design, p, u) → τ` networks.
    #[default]
    Behavior,
    /// Design → five polynomial coefficients.
    Coefficient,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitMetaConfig {
    pub mode: MetaMode,
    /// Network settings; the mode's defaults when absent.
    pub meta: Option<MetaConfig>,
    /// Per-design polynomial fits feeding the coefficient mode.
    pub poly: FitConfig,
}

impl FitMetaConfig {
    pub fn meta_config(&self) -> MetaConfig {
        self.meta.clone().unwrap_or_else(|| match self.mode {
            MetaMode::Behavior => MetaConfig::behavior_default(),
            MetaMode::Coefficient => MetaConfig::coefficient_default(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentEntry {
    pub n: usize,
    pub design: ModuleDesign,
    #[serde(default)]
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    /// Ground truth whose per-design polynomial fits drive the joints when
    /// no behavior meta-model is given as input.
    pub oracle: OracleSection,
    /// Segments; three five-module segments of the reference design when empty.
    pub segments: Vec<SegmentEntry>,
    pub pressure: f64,
    pub tip_masses_g: Vec<f64>,
    pub gravity: bool,
    /// Tilt of the chain axis away from vertical about the base y axis, deg.
    pub base_tilt_deg: f64,
    pub density: f64,
    pub solver: SolverConfig,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            oracle: OracleSection { preset: Preset::Helical, ..OracleSection::default() },
            segments: Vec::new(),
            pressure: 10.0,
            tip_masses_g: vec![0.0, 10.0, 20.0, 50.0],
            gravity: true,
            base_tilt_deg: -90.0,
            density: crate::prbm::DEFAULT_DENSITY,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefitSection {
    pub oracle: OracleSection,
    pub model: RefitModel,
}

impl Default for RefitSection {
    fn default() -> Self {
        Self { oracle: OracleSection { preset: Preset::Helical, ..OracleSection::default() }, model: RefitModel::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShapeMatchSection {
    pub target: TargetSpec,
    pub segments: usize,
    /// Module length bounds, mm; the meta-model family's `l` range when absent.
    pub module_length: Option<(f64, f64)>,
    pub structure: StructureConfig,
    /// Explicit structural candidates replacing the enumeration.
    pub candidates: Option<Vec<Vec<usize>>>,
    pub search: ShapeConfig,
    pub refit: Option<RefitSection>,
}

impl Default for ShapeMatchSection {
    fn default() -> Self {
        Self {
            target: TargetSpec::Helix {
                radius: 18.0,
                height: 60.0,
                turns: 1.0,
                handedness: Default::default(),
                samples: 721,
            },
            segments: 4,
            module_length: None,
            structure: StructureConfig::default(),
            candidates: None,
            search: ShapeConfig::default(),
            refit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    /// Actuation levels of the torque families.
    pub pressures: Vec<f64>,
    /// Deformation axis of the torque families; found from the free
    /// deflections when absent.
    pub deformation: Option<(f64, f64)>,
    pub width: f64,
    pub height: f64,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self { pressures: vec![0.0, 5.0, 10.0, 15.0], deformation: None, width: 480.0, height: 360.0 }
    }
}
