use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};
use vical_geom::Pose;

/// Camera-convention pose at `position` with the optical axis (`+z` camera)
/// aimed at `target` and the camera `y` axis (image down) aligned with world
/// down as closely as possible.
///
/// Degenerates only when the view direction is (anti)parallel to world `z`,
/// which the workspace geometry never produces; that case falls back to an
/// arbitrary horizontal image orientation.
pub fn face_point(position: &Vector3<f64>, target: &Vector3<f64>) -> Pose {
    let z_c = (target - position).normalize();
    let world_down = Vector3::new(0.0, 0.0, -1.0);
    let mut y_c = world_down - world_down.dot(&z_c) * z_c;
    if y_c.norm() < 1e-9 {
        y_c = Vector3::new(1.0, 0.0, 0.0) - z_c.x * z_c;
    }
    let y_c = y_c.normalize();
    let x_c = y_c.cross(&z_c);
    let rot = Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[x_c, y_c, z_c]));
    Pose::new(*position, UnitQuaternion::from_rotation_matrix(&rot))
}
