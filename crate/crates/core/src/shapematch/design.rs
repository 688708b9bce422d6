use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::Isometry3;
use serde::{Deserialize, Serialize};

use super::{ShapeError, StructuralCandidate};
use crate::domain::{DesignParam, ModuleDesign};
use crate::metamodel::{BehaviorMetaModel, BehaviorMetaModels, DesignFamily};
use crate::prbm::{
    solve_equilibrium, ChainSpec, EquilibriumState, JointLaw, JointType, LoadCase, SegmentSpec, SolverConfig,
    DEFAULT_DENSITY, SPHERICAL_AXES,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentDesign {
    pub n: usize,
    pub design: ModuleDesign,
    /// Rotation relative to the preceding segment, rad.
    pub phi: f64,
}

/// Full actuator description: segments plus the shared actuation input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActuatorDesign {
    pub segments: Vec<SegmentDesign>,
    pub pressure: f64,
}

impl ActuatorDesign {
    pub fn structure(&self) -> StructuralCandidate {
        StructuralCandidate::new(self.segments.iter().map(|s| s.n).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSettings {
    /// kg/mm³.
    pub density: f64,
    pub gravity: bool,
    /// Extra downward tip weight, g.
    pub tip_mass_g: f64,
    pub solver: SolverConfig,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self { density: DEFAULT_DENSITY, gravity: true, tip_mass_g: 0.0, solver: SolverConfig::default() }
    }
}

impl SimSettings {
    pub fn load_case(&self, pressure: f64) -> LoadCase {
        let lc = LoadCase::actuated(pressure).with_tip_mass(self.tip_mass_g);
        if self.gravity { lc } else { lc.without_gravity() }
    }

    /// Equilibrium of `design` with one joint law per segment.
    pub fn simulate(
        &self,
        design: &ActuatorDesign,
        laws: Vec<JointLaw>,
        joint_type: JointType,
        base_pose: Isometry3<f64>,
    ) -> Result<EquilibriumState, ShapeError> {
        let segments = design
            .segments
            .iter()
            .zip(laws)
            .map(|(s, law)| SegmentSpec { n: s.n, design: s.design, phi: s.phi, law })
            .collect();
        let mut chain = ChainSpec::new(segments, joint_type, self.density)?;
        chain.base_pose = base_pose;
        Ok(solve_equilibrium(&chain, &self.load_case(design.pressure), &self.solver)?)
    }
}

/// Behavior meta-models arranged as joint laws: spherical when `y`, `x` and
/// `z` models are present, revolute on the single axis otherwise.
#[derive(Debug, Clone)]
pub struct MetaLaws {
    pub models: Vec<Arc<BehaviorMetaModel>>,
    pub joint_type: JointType,
}

impl MetaLaws {
    pub fn new(models: &BehaviorMetaModels) -> Result<Self, ShapeError> {
        let pick = |l: &str| models.axis(l).map(|m| Arc::new(m.clone()));
        if let [Some(y), Some(x), Some(z)] = SPHERICAL_AXES.map(pick) {
            return Ok(Self { models: vec![y, x, z], joint_type: JointType::Spherical });
        }
        match models.axes.as_slice() {
            [only] => Ok(Self { models: vec![Arc::new(only.clone())], joint_type: JointType::Revolute }),
            _ => Err(ShapeError::InvalidConfig(format!(
                "behavior models must cover y, x and z or a single axis, got {:?}",
                models.labels()
            ))),
        }
    }

    pub fn family(&self) -> &DesignFamily {
        &self.models[0].family
    }

    pub fn actuation_range(&self) -> (f64, f64) {
        self.models[0].actuation_range
    }

    pub fn joint_law(&self, d: &ModuleDesign) -> Result<JointLaw, ShapeError> {
        Ok(JointLaw::meta_shared(&self.models, d)?)
    }

    pub fn laws_for(&self, design: &ActuatorDesign) -> Result<Vec<JointLaw>, ShapeError> {
        design.segments.iter().map(|s| self.joint_law(&s.design)).collect()
    }
}

/// Continuous search space of one structural candidate.
///
/// Variables: the family's varying design parameters for every segment
/// (segment-major), then `φ₂ … φ_N` in `[0, 2π]`, then the actuation input.
#[derive(Debug, Clone)]
pub struct DesignSpace {
    pub structure: StructuralCandidate,
    pub params: Vec<DesignParam>,
    pub param_bounds: Vec<(f64, f64)>,
    pub base: ModuleDesign,
    pub actuation_range: (f64, f64),
}

impl DesignSpace {
    pub fn new(structure: StructuralCandidate, family: &DesignFamily, actuation_range: (f64, f64)) -> Self {
        Self {
            params: family.varying_params(),
            param_bounds: family.bounds(),
            base: family.designs[0],
            structure,
            actuation_range,
        }
    }

    pub fn dimension(&self) -> usize {
        let n = self.structure.segments();
        n * self.params.len() + (n - 1) + 1
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        let n = self.structure.segments();
        let mut b = Vec::with_capacity(self.dimension());
        for _ in 0..n {
            b.extend(self.param_bounds.iter().copied());
        }
        b.extend(std::iter::repeat_n((0.0, TAU), n - 1));
        b.push(self.actuation_range);
        b
    }

    pub fn decode(&self, x: &[f64]) -> ActuatorDesign {
        let np = self.params.len();
        let n = self.structure.segments();
        let segments = (0..n)
            .map(|i| {
                let mut d = self.base;
                for (k, p) in self.params.iter().enumerate() {
                    d.set(*p, x[i * np + k]);
                }
                SegmentDesign { n: self.structure.n[i], design: d, phi: if i == 0 { 0.0 } else { x[n * np + i - 1] } }
            })
            .collect();
        ActuatorDesign { segments, pressure: x[n * np + n - 1] }
    }

    pub fn encode(&self, design: &ActuatorDesign) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.dimension());
        for s in &design.segments {
            x.extend(self.params.iter().map(|p| s.design.get(*p)));
        }
        x.extend(design.segments.iter().skip(1).map(|s| s.phi.rem_euclid(TAU)));
        x.push(design.pressure);
        x
    }
}
