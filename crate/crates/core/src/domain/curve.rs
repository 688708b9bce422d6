use nalgebra::{Isometry3, Point3};
use serde::{Deserialize, Serialize};

use super::DomainError;

/// Ordered 3D polyline in millimetres with strictly increasing arc length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve3 {
    points: Vec<Point3<f64>>,
}

impl Curve3 {
    pub fn new(points: Vec<Point3<f64>>) -> Result<Self, DomainError> {
        if points.len() < 2 {
            return Err(DomainError::InvalidCurve(format!("need at least 2 points, got {}", points.len())));
        }
        for (i, w) in points.windows(2).enumerate() {
            if !w[0].iter().chain(w[1].iter()).all(|v| v.is_finite()) {
                return Err(DomainError::InvalidCurve(format!("non-finite point near index {i}")));
            }
            if (w[1] - w[0]).norm() <= 0.0 {
                return Err(DomainError::InvalidCurve(format!("repeated point at index {}", i + 1)));
            }
        }
        Ok(Self { points })
    }

    pub fn from_xyz(points: &[[f64; 3]]) -> Result<Self, DomainError> {
        Self::new(points.iter().map(|p| Point3::new(p[0], p[1], p[2])).collect())
    }

    pub fn points(&self) -> &[Point3<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> Point3<f64> {
        self.points[0]
    }

    pub fn last(&self) -> Point3<f64> {
        self.points[self.points.len() - 1]
    }

    /// Cumulative arc length at every point, starting at 0.
    pub fn cumulative_lengths(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.points.len());
        out.push(0.0);
        for w in self.points.windows(2) {
            acc += (w[1] - w[0]).norm();
            out.push(acc);
        }
        out
    }

    pub fn arc_length(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    /// Cumulative arc length divided by the total, in `[0, 1]`.
    pub fn normalized_parameters(&self) -> Vec<f64> {
        let cum = self.cumulative_lengths();
        let total = *cum.last().unwrap();
        let mut s: Vec<f64> = cum.iter().map(|c| c / total).collect();
        *s.last_mut().unwrap() = 1.0;
        s
    }

    /// Point at normalized arc-length parameter `s` by linear interpolation.
    pub fn point_at(&self, s: f64) -> Point3<f64> {
        let cum = self.cumulative_lengths();
        let total = *cum.last().unwrap();
        let target = s.clamp(0.0, 1.0) * total;
        if target <= 0.0 {
            return self.first();
        }
        if target >= total {
            return self.last();
        }
        // first index whose cumulative length reaches the target
        let k = cum.partition_point(|&c| c < target).max(1);
        let (c0, c1) = (cum[k - 1], cum[k]);
        let t = (target - c0) / (c1 - c0);
        self.points[k - 1] + (self.points[k] - self.points[k - 1]) * t
    }

    pub fn transformed(&self, iso: &Isometry3<f64>) -> Self {
        Self { points: self.points.iter().map(|p| iso * p).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Translation3, UnitQuaternion, Vector3};
    use proptest::prelude::*;

    #[test]
    fn rejects_repeated_points() {
        assert!(Curve3::from_xyz(&[[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]).is_err());
        assert!(Curve3::from_xyz(&[[0.0, 0.0, 0.0]]).is_err());
    }

    #[test]
    fn point_at_interpolates_by_length() {
        let c = Curve3::from_xyz(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 3.0, 0.0]]).unwrap();
        assert_eq!(c.arc_length(), 4.0);
        assert_eq!(c.point_at(0.25), Point3::new(1.0, 0.0, 0.0));
        assert_eq!(c.point_at(0.5), Point3::new(1.0, 1.0, 0.0));
        assert_eq!(c.point_at(1.0), Point3::new(1.0, 3.0, 0.0));
        assert_eq!(c.normalized_parameters(), vec![0.0, 0.25, 1.0]);
    }

    proptest! {
        #[test]
        fn arc_length_invariant_under_rigid_motion(
            pts in prop::collection::vec(prop::array::uniform3(-50.0f64..50.0), 2..20),
            axis in prop::array::uniform3(-1.0f64..1.0),
            angle in -3.0f64..3.0,
            shift in prop::array::uniform3(-100.0f64..100.0),
        ) {
            let Ok(c) = Curve3::from_xyz(&pts) else { return Ok(()); };
            let axis = Vector3::from(axis);
            prop_assume!(axis.norm() > 1e-3);
            let rot = UnitQuaternion::from_scaled_axis(axis.normalize() * angle);
            let iso = Isometry3::from_parts(Translation3::from(Vector3::from(shift)), rot);
            let l0 = c.arc_length();
            let l1 = c.transformed(&iso).arc_length();
            prop_assert!((l0 - l1).abs() <= 1e-9 * l0.max(1.0));
        }
    }
}
