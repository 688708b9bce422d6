use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::PrbmError;
use crate::domain::ModuleDesign;
use crate::metamodel::{BehaviorMetaModel, BehaviorMetaModels};
use crate::mlp::MlpSurrogate;
use crate::polyfit::PolySurrogate;

/// The surrogate behind one joint axis.
#[derive(Debug, Clone)]
pub enum LawModel {
    Poly(Arc<PolySurrogate>),
    Mlp(Arc<MlpSurrogate>),
    Meta { model: Arc<BehaviorMetaModel>, design: ModuleDesign },
}

impl LawModel {
    fn raw(&self, p: f64, u: f64) -> f64 {
        match self {
            LawModel::Poly(s) => s.eval(p, u),
            LawModel::Mlp(m) => m.predict_scalar(&[p, u]).expect("two-input law network"),
            LawModel::Meta { model, design } => model.predict(design, p, u),
        }
    }
}

/// Which operating-range bound an evaluation ran into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClampKind {
    Actuation,
    Deformation,
}

/// A surrogate restricted to its sampled operating range.
///
/// Actuation outside the range is clamped. Deformation outside the range is
/// evaluated at the boundary and continued linearly with `wall_stiffness`, so
/// the residual stays continuous and an equilibrium beyond the range can
/// still be located and reported.
#[derive(Debug, Clone)]
pub struct AxisLaw {
    pub model: LawModel,
    pub actuation_range: (f64, f64),
    pub deformation_range: (f64, f64),
    pub wall_stiffness: f64,
}

impl AxisLaw {
    pub fn new(model: LawModel, actuation_range: (f64, f64), deformation_range: (f64, f64)) -> Result<Self, PrbmError> {
        for (name, (lo, hi)) in [("actuation", actuation_range), ("deformation", deformation_range)] {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(PrbmError::InvalidChain(format!("empty {name} range ({lo}, {hi})")));
            }
        }
        let mut law = Self { model, actuation_range, deformation_range, wall_stiffness: 0.0 };
        law.wall_stiffness = law.boundary_stiffness();
        Ok(law)
    }

    /// Polynomial law valid for all `p` and `u`.
    pub fn unbounded_poly(s: PolySurrogate) -> Self {
        Self {
            model: LawModel::Poly(Arc::new(s)),
            actuation_range: (f64::NEG_INFINITY, f64::INFINITY),
            deformation_range: (f64::NEG_INFINITY, f64::INFINITY),
            wall_stiffness: 0.0,
        }
    }

    fn boundary_stiffness(&self) -> f64 {
        let (plo, phi) = self.actuation_range;
        let (ulo, uhi) = self.deformation_range;
        if !(ulo.is_finite() && uhi.is_finite()) || uhi <= ulo {
            return 0.0;
        }
        let ps: Vec<f64> = if plo.is_finite() && phi.is_finite() { vec![plo, 0.5 * (plo + phi), phi] } else { vec![0.0] };
        let h = 1e-3 * (uhi - ulo);
        let mut k: f64 = 0.0;
        for p in ps {
            k = k.max(((self.model.raw(p, ulo + h) - self.model.raw(p, ulo)) / h).abs());
            k = k.max(((self.model.raw(p, uhi) - self.model.raw(p, uhi - h)) / h).abs());
        }
        k.max(1e-9)
    }

    /// Net effort with range handling.
    pub fn eval(&self, p: f64, u: f64) -> f64 {
        let pc = p.clamp(self.actuation_range.0, self.actuation_range.1);
        let (ulo, uhi) = self.deformation_range;
        if u < ulo {
            self.model.raw(pc, ulo) - self.wall_stiffness * (u - ulo)
        } else if u > uhi {
            self.model.raw(pc, uhi) - self.wall_stiffness * (u - uhi)
        } else {
            self.model.raw(pc, u)
        }
    }

    /// Range violations at `(p, u)`.
    pub fn violations(&self, p: f64, u: f64) -> Vec<(ClampKind, f64, f64)> {
        let mut out = Vec::new();
        let tol = 1e-12;
        let (plo, phi) = self.actuation_range;
        if p < plo - tol || p > phi + tol {
            out.push((ClampKind::Actuation, p, p.clamp(plo, phi)));
        }
        let (ulo, uhi) = self.deformation_range;
        if u < ulo - tol || u > uhi + tol {
            out.push((ClampKind::Deformation, u, u.clamp(ulo, uhi)));
        }
        out
    }
}

/// Per-axis laws of one lumped joint: one entry for a revolute joint,
/// `(y, x, z)` for a spherical joint.
#[derive(Debug, Clone)]
pub struct JointLaw {
    pub axes: Vec<AxisLaw>,
}

/// Axis order of spherical joints.
pub const SPHERICAL_AXES: [&str; 3] = ["y", "x", "z"];

impl JointLaw {
    pub fn revolute(law: AxisLaw) -> Self {
        Self { axes: vec![law] }
    }

    pub fn spherical(y: AxisLaw, x: AxisLaw, z: AxisLaw) -> Self {
        Self { axes: vec![y, x, z] }
    }

    /// Polynomial law on its sampled box.
    pub fn poly(s: PolySurrogate, actuation_range: (f64, f64), deformation_range: (f64, f64)) -> Result<AxisLaw, PrbmError> {
        AxisLaw::new(LawModel::Poly(Arc::new(s)), actuation_range, deformation_range)
    }

    pub fn mlp(m: MlpSurrogate, actuation_range: (f64, f64), deformation_range: (f64, f64)) -> Result<AxisLaw, PrbmError> {
        if m.spec.input_dim != 2 || m.spec.output_dim != 1 {
            return Err(PrbmError::InvalidChain("joint-law network must map (p, u) to one effort".into()));
        }
        AxisLaw::new(LawModel::Mlp(Arc::new(m)), actuation_range, deformation_range)
    }

    /// Behavior meta-model laws for one design. `axes` lists the labels to
    /// use, in joint-coordinate order.
    pub fn meta(models: &BehaviorMetaModels, design: &ModuleDesign, axes: &[&str]) -> Result<Self, PrbmError> {
        let mut out = Vec::with_capacity(axes.len());
        for label in axes {
            let m = models
                .axis(label)
                .ok_or_else(|| PrbmError::InvalidChain(format!("meta-model has no axis `{label}`")))?;
            m.check_design(design).map_err(|e| PrbmError::InvalidChain(e.to_string()))?;
            out.push(AxisLaw::new(
                LawModel::Meta { model: Arc::new(m.clone()), design: *design },
                m.actuation_range,
                m.deformation_range,
            )?);
        }
        Ok(Self { axes: out })
    }

    /// Like [`JointLaw::meta`] but sharing already-wrapped models.
    pub fn meta_shared(models: &[Arc<BehaviorMetaModel>], design: &ModuleDesign) -> Result<Self, PrbmError> {
        let mut out = Vec::with_capacity(models.len());
        for m in models {
            m.check_design(design).map_err(|e| PrbmError::InvalidChain(e.to_string()))?;
            out.push(AxisLaw::new(
                LawModel::Meta { model: Arc::clone(m), design: *design },
                m.actuation_range,
                m.deformation_range,
            )?);
        }
        Ok(Self { axes: out })
    }

    pub fn dof(&self) -> usize {
        self.axes.len()
    }
}
