use std::f64::consts::PI;

use nalgebra::{Isometry3, Matrix3, Point3, Rotation3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::ShapeError;
use crate::domain::Curve3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Handedness {
    #[default]
    Right,
    Left,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ShapeDescriptor {
    Helix { radius: f64, height: f64, turns: f64, handedness: Handedness },
}

/// A curve to match, with the pose the actuator base takes in its frame.
///
/// The actuator's undeformed axis is the base frame's z axis and its
/// preferred bending direction is the base frame's x axis. Gravity acts
/// along −z of the target frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetShape {
    pub curve: Curve3,
    pub descriptor: Option<ShapeDescriptor>,
    pub base_pose: Isometry3<f64>,
}

/// Explicit base frame for point-list targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseFrame {
    pub origin: [f64; 3],
    pub z_axis: [f64; 3],
    pub x_axis: [f64; 3],
}

fn default_turns() -> f64 {
    1.0
}

fn default_samples() -> usize {
    721
}

/// Target file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    Helix {
        radius: f64,
        height: f64,
        #[serde(default = "default_turns")]
        turns: f64,
        #[serde(default)]
        handedness: Handedness,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    Points {
        points: Vec<[f64; 3]>,
        #[serde(default)]
        base: Option<BaseFrame>,
    },
}

impl TargetSpec {
    pub fn build(&self) -> Result<TargetShape, ShapeError> {
        match self {
            TargetSpec::Helix { radius, height, turns, handedness, samples } => {
                TargetShape::helix(*radius, *height, *turns, *handedness, *samples)
            }
            TargetSpec::Points { points, base } => {
                let mut t = TargetShape::from_points(points)?;
                if let Some(b) = base {
                    t.base_pose = frame_pose(
                        Point3::from(b.origin),
                        Vector3::from(b.z_axis),
                        Vector3::from(b.x_axis),
                    )?;
                }
                Ok(t)
            }
        }
    }
}

/// Pose with origin `o`, z along `z` and x along the part of `x`
/// orthogonal to `z`.
fn frame_pose(o: Point3<f64>, z: Vector3<f64>, x: Vector3<f64>) -> Result<Isometry3<f64>, ShapeError> {
    let z = z.try_normalize(1e-12).ok_or_else(|| ShapeError::InvalidConfig("zero base z axis".into()))?;
    let x = (x - z * z.dot(&x))
        .try_normalize(1e-12)
        .ok_or_else(|| ShapeError::InvalidConfig("base x axis is parallel to z".into()))?;
    let y = z.cross(&x);
    let rot = Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[x, y, z]));
    Ok(Isometry3::from_parts(Translation3::from(o.coords), UnitQuaternion::from_rotation_matrix(&rot)))
}

impl TargetShape {
    /// Helix starting at the origin around a vertical axis through
    /// `(−radius, 0)`, rising `height` over `turns` turns. The base frame is
    /// the start Frenet frame: z along the tangent, x toward the axis.
    pub fn helix(radius: f64, height: f64, turns: f64, handedness: Handedness, samples: usize) -> Result<Self, ShapeError> {
        if !(radius > 0.0 && height >= 0.0 && turns > 0.0 && radius.is_finite() && height.is_finite() && turns.is_finite()) {
            return Err(ShapeError::InvalidConfig(format!("helix radius {radius}, height {height}, turns {turns}")));
        }
        if samples < 2 {
            return Err(ShapeError::InvalidConfig("helix needs at least 2 samples".into()));
        }
        let sign = if handedness == Handedness::Right { 1.0 } else { -1.0 };
        let theta_end = 2.0 * PI * turns;
        let rise = height / theta_end;
        let points: Vec<Point3<f64>> = (0..samples)
            .map(|k| {
                let th = theta_end * k as f64 / (samples - 1) as f64;
                Point3::new(radius * (th.cos() - 1.0), sign * radius * th.sin(), rise * th)
            })
            .collect();
        let base_pose = frame_pose(Point3::origin(), Vector3::new(0.0, sign * radius, rise), -Vector3::x())?;
        Ok(Self {
            curve: Curve3::new(points)?,
            descriptor: Some(ShapeDescriptor::Helix { radius, height, turns, handedness }),
            base_pose,
        })
    }

    /// Point list expressed in the actuator base frame.
    pub fn from_points(points: &[[f64; 3]]) -> Result<Self, ShapeError> {
        Ok(Self { curve: Curve3::from_xyz(points)?, descriptor: None, base_pose: Isometry3::identity() })
    }

    pub fn from_curve(curve: Curve3, base_pose: Isometry3<f64>) -> Self {
        Self { curve, descriptor: None, base_pose }
    }

    pub fn from_toml(text: &str) -> Result<Self, ShapeError> {
        let spec: TargetSpec = toml::from_str(text).map_err(|e| ShapeError::Format(e.to_string()))?;
        spec.build()
    }

    pub fn arc_length(&self) -> f64 {
        match &self.descriptor {
            Some(ShapeDescriptor::Helix { radius, height, turns, .. }) => {
                ((2.0 * PI * radius * turns).powi(2) + height.powi(2)).sqrt()
            }
            None => self.curve.arc_length(),
        }
    }
}

/// Target points at the simulated curve's normalized arc-length parameters.
pub fn resample_target(target: &TargetShape, simulated: &Curve3) -> Result<Curve3, ShapeError> {
    let cum = target.curve.cumulative_lengths();
    let total = *cum.last().expect("curve has points");
    if !(total > 0.0) {
        return Err(ShapeError::DegenerateCurve("target has zero length".into()));
    }
    let pts = target.curve.points();
    let out: Vec<Point3<f64>> = simulated
        .normalized_parameters()
        .iter()
        .map(|&s| {
            let goal = s * total;
            if s <= 0.0 {
                return pts[0];
            }
            if s >= 1.0 {
                return pts[pts.len() - 1];
            }
            let k = cum.partition_point(|&c| c < goal).clamp(1, pts.len() - 1);
            let t = (goal - cum[k - 1]) / (cum[k] - cum[k - 1]);
            pts[k - 1] + (pts[k] - pts[k - 1]) * t
        })
        .collect();
    Ok(Curve3::new(out)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchMetrics {
    /// mm.
    pub rmse: f64,
    /// Largest pointwise distance, mm.
    pub e_max: f64,
}

pub fn match_metrics(simulated: &Curve3, resampled: &Curve3) -> Result<MatchMetrics, ShapeError> {
    if simulated.len() != resampled.len() {
        return Err(ShapeError::LengthMismatch(simulated.len(), resampled.len()));
    }
    let d: Vec<f64> = simulated.points().iter().zip(resampled.points()).map(|(a, b)| (a - b).norm()).collect();
    let rmse = (d.iter().map(|x| x * x).sum::<f64>() / d.len() as f64).sqrt();
    let e_max = d.iter().copied().fold(0.0, f64::max);
    Ok(MatchMetrics { rmse, e_max })
}
