use crate::{rpy_of, wrapped_diff};
use nalgebra::{Matrix4, Rotation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

/// Rigid transform / pose: position plus unit-quaternion orientation.
///
/// As a transform it maps local coordinates to world coordinates:
/// `p_world = R * p_local + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            position: Vector3::zeros(),
            orientation: UnitQuaternion::identity(),
        }
    }

    pub fn new(position: Vector3<f64>, orientation: UnitQuaternion<f64>) -> Self {
        Self {
            position,
            orientation: UnitQuaternion::new_normalize(orientation.into_inner()),
        }
    }

    /// Pose from a translation and extrinsic X-Y-Z Euler angles.
    pub fn from_rpy(position: Vector3<f64>, roll: f64, pitch: f64, yaw: f64) -> Self {
        Self::new(
            position,
            UnitQuaternion::from_rotation_matrix(&crate::euler_to_rot(roll, pitch, yaw)),
        )
    }

    pub fn rotation(&self) -> Rotation3<f64> {
        self.orientation.to_rotation_matrix()
    }

    /// `(roll, pitch, yaw)` of the orientation (lenient at gimbal lock).
    pub fn rpy(&self) -> (f64, f64, f64) {
        rpy_of(&self.rotation())
    }

    /// Maps a point from the local frame into the world frame.
    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.orientation * p + self.position
    }

    /// `self * rhs` in homogeneous-matrix terms: applies `rhs` first, then
    /// `self`.
    pub fn compose(&self, rhs: &Pose) -> Pose {
        Pose::new(
            self.orientation * rhs.position + self.position,
            self.orientation * rhs.orientation,
        )
    }

    pub fn inverse(&self) -> Pose {
        let inv_q = self.orientation.inverse();
        Pose::new(-(inv_q * self.position), inv_q)
    }

    pub fn to_matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0)
            .copy_from(self.rotation().matrix());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.position);
        m
    }
}

/// Euclidean norm of the componentwise wrapped Euler-angle difference
/// between two orientations. This is the rotation-distance measure used for
/// motion penalties and coverage bookkeeping.
pub fn euler_distance(a: &Pose, b: &Pose) -> f64 {
    let (ra, pa, ya) = a.rpy();
    let (rb, pb, yb) = b.rpy();
    let d = [
        wrapped_diff(ra, rb),
        wrapped_diff(pa, pb),
        wrapped_diff(ya, yb),
    ];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Serde view of a pose: translation plus `wxyz` quaternion, so records
/// round-trip without any Euler-angle convention in the file format.
#[derive(Serialize, Deserialize)]
struct PoseRepr {
    xyz: [f64; 3],
    quat_wxyz: [f64; 4],
}

impl Serialize for Pose {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let q = self.orientation.quaternion();
        PoseRepr {
            xyz: [self.position.x, self.position.y, self.position.z],
            quat_wxyz: [q.w, q.i, q.j, q.k],
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Pose {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = PoseRepr::deserialize(deserializer)?;
        let [w, i, j, k] = repr.quat_wxyz;
        let q = nalgebra::Quaternion::new(w, i, j, k);
        // Quaternions written by `serialize` are already unit; keep their bit
        // pattern so records round-trip exactly.
        let orientation = if (q.norm() - 1.0).abs() < 1e-12 {
            UnitQuaternion::new_unchecked(q)
        } else {
            UnitQuaternion::new_normalize(q)
        };
        Ok(Pose {
            position: Vector3::new(repr.xyz[0], repr.xyz[1], repr.xyz[2]),
            orientation,
        })
    }
}
