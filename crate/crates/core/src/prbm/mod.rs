//! Quasi-static pseudo-rigid-body chains.
//!
//! A chain is a sequence of segments, each made of `n` identical modules.
//! Every module contributes one lumped joint (revolute about the local y
//! axis, or spherical with intrinsic y–x–z rotations) located at
//! `joint_position · l` along the module. Lengths are in millimetres, masses
//! in kilograms, forces in newtons and joint efforts in N·m.

mod kinematics;
mod law;
mod solve;

pub use kinematics::{centerline, Kinematics};
pub use law::{AxisLaw, ClampKind, JointLaw, LawModel, SPHERICAL_AXES};
pub use solve::{
    load_efforts, residual, solve_equilibrium, sweep_loadcases, ClampEvent, EquilibriumState, SolverConfig,
};

use nalgebra::{Isometry3, Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::domain::ModuleDesign;

#[derive(Debug, thiserror::Error)]
pub enum PrbmError {
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("invalid load case: {0}")]
    InvalidLoad(String),
    #[error("no equilibrium after {iterations} iterations (residual {residual_norm:.3e} N·m)")]
    NonConvergence { iterations: usize, residual_norm: f64, best: Box<EquilibriumState> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointType {
    Revolute,
    Spherical,
}

impl JointType {
    pub fn dof(self) -> usize {
        match self {
            JointType::Revolute => 1,
            JointType::Spherical => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SegmentSpec {
    pub n: usize,
    pub design: ModuleDesign,
    /// Rotation about the chain axis relative to the preceding segment, rad.
    pub phi: f64,
    pub law: JointLaw,
}

#[derive(Debug, Clone)]
pub struct ChainSpec {
    pub segments: Vec<SegmentSpec>,
    pub joint_type: JointType,
    /// Joint location as a fraction of module length from the module base.
    pub joint_position: f64,
    /// One mass per link (the rigid body following each joint), kg.
    pub link_masses: Vec<f64>,
    pub base_pose: Isometry3<f64>,
    /// m/s².
    pub gravity: Vector3<f64>,
}

/// Silicone density used for default module masses, kg/mm³.
pub const DEFAULT_DENSITY: f64 = 1.07e-6;

impl ChainSpec {
    /// Chain with module masses from wall volume and `density`, joints at
    /// module midpoints and gravity along −z.
    pub fn new(segments: Vec<SegmentSpec>, joint_type: JointType, density: f64) -> Result<Self, PrbmError> {
        let mut c = Self {
            segments,
            joint_type,
            joint_position: 0.5,
            link_masses: Vec::new(),
            base_pose: Isometry3::identity(),
            gravity: Vector3::new(0.0, 0.0, -9.81),
        };
        let module: Vec<f64> = c.module_designs().iter().map(|d| density * d.wall_volume()).collect();
        c.link_masses = c.links_from_module_masses(&module);
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), PrbmError> {
        let bad = |m: String| Err(PrbmError::InvalidChain(m));
        if self.segments.is_empty() {
            return bad("no segments".into());
        }
        if self.segments[0].phi != 0.0 {
            return bad(format!("first segment rotation must be 0, got {}", self.segments[0].phi));
        }
        for (i, s) in self.segments.iter().enumerate() {
            if s.n == 0 {
                return bad(format!("segment {i} has no modules"));
            }
            if s.law.dof() != self.joint_type.dof() {
                return bad(format!("segment {i} law has {} axes, joint needs {}", s.law.dof(), self.joint_type.dof()));
            }
            if s.design.check_positive().is_err() || !s.phi.is_finite() {
                return bad(format!("segment {i} has an invalid design or rotation"));
            }
        }
        if !(0.0..1.0).contains(&self.joint_position) {
            return bad(format!("joint_position must be in [0, 1), got {}", self.joint_position));
        }
        if self.link_masses.len() != self.joint_count() {
            return bad(format!("{} link masses for {} joints", self.link_masses.len(), self.joint_count()));
        }
        if self.link_masses.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return bad("link masses must be positive".into());
        }
        if !self.gravity.iter().all(|g| g.is_finite()) {
            return bad("non-finite gravity".into());
        }
        Ok(())
    }

    pub fn joint_count(&self) -> usize {
        self.segments.iter().map(|s| s.n).sum()
    }

    pub fn dof(&self) -> usize {
        self.joint_count() * self.joint_type.dof()
    }

    pub fn module_designs(&self) -> Vec<ModuleDesign> {
        self.segments.iter().flat_map(|s| std::iter::repeat_n(s.design, s.n)).collect()
    }

    /// Segment index of every joint.
    pub fn joint_segments(&self) -> Vec<usize> {
        self.segments.iter().enumerate().flat_map(|(i, s)| std::iter::repeat_n(i, s.n)).collect()
    }

    /// The link after joint `j` carries the part of module `j` beyond the
    /// joint and the part of module `j+1` before its joint.
    pub fn links_from_module_masses(&self, module: &[f64]) -> Vec<f64> {
        let f = self.joint_position;
        (0..module.len())
            .map(|j| (1.0 - f) * module[j] + module.get(j + 1).map_or(0.0, |m| f * m))
            .collect()
    }

    /// Sum of module lengths, mm.
    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|s| s.n as f64 * s.design.l).sum()
    }
}

/// Actuation input of a load case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Actuation {
    Uniform(f64),
    PerSegment(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TipForce {
    None,
    /// Fixed world-frame force, N.
    Constant { force: [f64; 3] },
    /// Force of fixed magnitude pointing from the tip to a world point (mm).
    Toward { point: [f64; 3], magnitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadCase {
    pub actuation: Actuation,
    pub tip_force: TipForce,
    /// Pure world-frame moment on the terminal link, N·m.
    #[serde(default)]
    pub tip_moment: Option<[f64; 3]>,
    pub gravity_on: bool,
}

pub const STANDARD_GRAVITY: f64 = 9.81;

impl LoadCase {
    pub fn actuated(p: f64) -> Self {
        Self { actuation: Actuation::Uniform(p), tip_force: TipForce::None, tip_moment: None, gravity_on: true }
    }

    /// Downward (−z) tip weight of `grams`.
    pub fn with_tip_mass(mut self, grams: f64) -> Self {
        self.tip_force = if grams == 0.0 {
            TipForce::None
        } else {
            TipForce::Constant { force: [0.0, 0.0, -grams * 1e-3 * STANDARD_GRAVITY] }
        };
        self
    }

    pub fn without_gravity(mut self) -> Self {
        self.gravity_on = false;
        self
    }

    pub fn validate(&self, chain: &ChainSpec) -> Result<(), PrbmError> {
        let finite = match &self.actuation {
            Actuation::Uniform(p) => p.is_finite(),
            Actuation::PerSegment(ps) => {
                if ps.len() != chain.segments.len() {
                    return Err(PrbmError::InvalidLoad(format!(
                        "{} actuation values for {} segments",
                        ps.len(),
                        chain.segments.len()
                    )));
                }
                ps.iter().all(|p| p.is_finite())
            }
        } && match &self.tip_force {
            TipForce::None => true,
            TipForce::Constant { force } => force.iter().all(|v| v.is_finite()),
            TipForce::Toward { point, magnitude } => point.iter().all(|v| v.is_finite()) && magnitude.is_finite(),
        } && self.tip_moment.is_none_or(|m| m.iter().all(|v| v.is_finite()));
        if finite { Ok(()) } else { Err(PrbmError::InvalidLoad("non-finite entry".into())) }
    }

    pub(crate) fn segment_actuation(&self, segment: usize) -> f64 {
        match &self.actuation {
            Actuation::Uniform(p) => *p,
            Actuation::PerSegment(ps) => ps[segment],
        }
    }

    pub(crate) fn tip_force_at(&self, tip: &Point3<f64>) -> Vector3<f64> {
        match &self.tip_force {
            TipForce::None => Vector3::zeros(),
            TipForce::Constant { force } => Vector3::from(*force),
            TipForce::Toward { point, magnitude } => {
                let d = Point3::from(*point) - tip;
                let n = d.norm();
                if n > 0.0 { d * (*magnitude / n) } else { Vector3::zeros() }
            }
        }
    }
}

#[cfg(test)]
mod tests;
