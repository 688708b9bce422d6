use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};

use super::{ChainSpec, JointType};
use crate::domain::Curve3;

/// World-frame geometry of a chain configuration.
#[derive(Debug, Clone)]
pub struct Kinematics {
    /// Joint locations, mm.
    pub joints: Vec<Point3<f64>>,
    /// Rotation axis of every joint coordinate, in coordinate order.
    pub axes: Vec<Vector3<f64>>,
    /// Midpoint of the link following each joint, mm.
    pub link_midpoints: Vec<Point3<f64>>,
    /// Base followed by every module end, mm.
    pub module_ends: Vec<Point3<f64>>,
    pub tip: Point3<f64>,
}

fn rot(axis: Vector3<f64>, angle: f64) -> Isometry3<f64> {
    Isometry3::from_parts(Translation3::identity(), UnitQuaternion::from_scaled_axis(axis * angle))
}

fn advance(d: f64) -> Isometry3<f64> {
    Isometry3::translation(0.0, 0.0, d)
}

impl Kinematics {
    pub fn compute(chain: &ChainSpec, q: &[f64]) -> Self {
        let n = chain.joint_count();
        let dof = chain.joint_type.dof();
        debug_assert_eq!(q.len(), n * dof);
        let f = chain.joint_position;
        let lengths: Vec<f64> = chain.module_designs().iter().map(|d| d.l).collect();

        let mut joints = Vec::with_capacity(n);
        let mut axes = Vec::with_capacity(n * dof);
        let mut link_midpoints = Vec::with_capacity(n);
        let mut module_ends = Vec::with_capacity(n + 1);
        let mut t = chain.base_pose;
        module_ends.push(t * Point3::origin());
        let mut j = 0;
        for seg in &chain.segments {
            t *= rot(Vector3::z(), seg.phi);
            for _ in 0..seg.n {
                let l = lengths[j];
                t *= advance(f * l);
                joints.push(t * Point3::origin());
                let qj = &q[j * dof..(j + 1) * dof];
                match chain.joint_type {
                    JointType::Revolute => {
                        axes.push(t.rotation * Vector3::y());
                        t *= rot(Vector3::y(), qj[0]);
                    }
                    JointType::Spherical => {
                        axes.push(t.rotation * Vector3::y());
                        t *= rot(Vector3::y(), qj[0]);
                        axes.push(t.rotation * Vector3::x());
                        t *= rot(Vector3::x(), qj[1]);
                        axes.push(t.rotation * Vector3::z());
                        t *= rot(Vector3::z(), qj[2]);
                    }
                }
                let link_len = (1.0 - f) * l + lengths.get(j + 1).map_or(0.0, |next| f * next);
                link_midpoints.push(t * Point3::new(0.0, 0.0, 0.5 * link_len));
                t *= advance((1.0 - f) * l);
                module_ends.push(t * Point3::origin());
                j += 1;
            }
        }
        let tip = *module_ends.last().expect("base point present");
        Self { joints, axes, link_midpoints, module_ends, tip }
    }
}

/// Base point and every module end of the deformed chain.
pub fn centerline(chain: &ChainSpec, q: &[f64]) -> Curve3 {
    let k = Kinematics::compute(chain, q);
    Curve3::new(k.module_ends).expect("module ends are distinct for positive lengths")
}
