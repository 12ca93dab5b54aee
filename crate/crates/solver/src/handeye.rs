use crate::SolveError;
use nalgebra::{DMatrix, DVector, Matrix3, Matrix4, Quaternion, UnitQuaternion, Vector3};
use vical_geom::Pose;

/// Rotations smaller than this contribute no usable axis information.
const ANGLE_FLOOR: f64 = 1e-3;
/// Minimum sine of the angle between the two best rotation axes.
const AXIS_SPREAD_FLOOR: f64 = 1e-3;

/// Left quaternion multiplication matrix: `L(q) p = q * p` on `[w,x,y,z]`.
fn quat_left(q: &UnitQuaternion<f64>) -> Matrix4<f64> {
    let (w, x, y, z) = (q.w, q.i, q.j, q.k);
    Matrix4::new(
        w, -x, -y, -z, //
        x, w, -z, y, //
        y, z, w, -x, //
        z, -y, x, w,
    )
}

/// Right quaternion multiplication matrix: `R(q) p = p * q` on `[w,x,y,z]`.
fn quat_right(q: &UnitQuaternion<f64>) -> Matrix4<f64> {
    let (w, x, y, z) = (q.w, q.i, q.j, q.k);
    Matrix4::new(
        w, -x, -y, -z, //
        x, w, z, -y, //
        y, -z, w, x, //
        z, y, -x, w,
    )
}

/// Flips the quaternion sign so the scalar part is non-negative. Both sides
/// of a conjugation can be flipped independently without changing the
/// underlying rotations, so a consistent hemisphere keeps the stacked linear
/// system sign-coherent.
fn positive_w(q: &UnitQuaternion<f64>) -> UnitQuaternion<f64> {
    if q.w < 0.0 {
        UnitQuaternion::new_unchecked(Quaternion::new(-q.w, -q.i, -q.j, -q.k))
    } else {
        *q
    }
}

/// Camera-to-IMU transform from paired relative motions.
///
/// `cam_motions[i]` and `imu_motions[i]` are the same physical motion seen
/// by the two sensors (camera frame i to camera frame i+1, IMU likewise).
/// Solves `A_i X = X B_i` with `A` the IMU motion and `B` the camera motion:
/// first the rotation, as the null vector of the stacked linear quaternion
/// system `(L(q_a) - R(q_b)) q_x = 0`, then the translation from the linear
/// least squares `(R_a - I) t_x = R_x t_b - t_a`.
pub fn hand_eye_solve(cam_motions: &[Pose], imu_motions: &[Pose]) -> Result<Pose, SolveError> {
    assert_eq!(
        cam_motions.len(),
        imu_motions.len(),
        "motion lists must pair up"
    );
    let n = cam_motions.len();
    if n < 2 {
        return Err(SolveError::InsufficientData(format!(
            "{n} motion pairs, need at least 2"
        )));
    }

    // The axes must span more than a single line for the rotation (and the
    // translation normal matrix) to be determined.
    let axes: Vec<Vector3<f64>> = imu_motions
        .iter()
        .filter(|m| m.orientation.angle() > ANGLE_FLOOR)
        .map(|m| m.orientation.scaled_axis().normalize())
        .collect();
    let spread = axes
        .iter()
        .enumerate()
        .flat_map(|(i, a)| axes[i + 1..].iter().map(move |b| a.cross(b).norm()))
        .fold(0.0, f64::max);
    if axes.len() < 2 || spread < AXIS_SPREAD_FLOOR {
        return Err(SolveError::DegenerateMotion);
    }

    let mut m = DMatrix::<f64>::zeros(4 * n, 4);
    for (i, (cam, imu)) in cam_motions.iter().zip(imu_motions).enumerate() {
        let qa = positive_w(&imu.orientation);
        let qb = positive_w(&cam.orientation);
        let block = quat_left(&qa) - quat_right(&qb);
        m.view_mut((4 * i, 0), (4, 4)).copy_from(&block);
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("svd computes v_t");
    let min_idx = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty singular values");
    let qx = v_t.row(min_idx);
    let rot = UnitQuaternion::from_quaternion(Quaternion::new(qx[0], qx[1], qx[2], qx[3]));

    let r_x = rot.to_rotation_matrix().into_inner();
    let mut a = DMatrix::<f64>::zeros(3 * n, 3);
    let mut b = DVector::<f64>::zeros(3 * n);
    for (i, (cam, imu)) in cam_motions.iter().zip(imu_motions).enumerate() {
        let block = imu.rotation().into_inner() - Matrix3::identity();
        let rhs = r_x * cam.position - imu.position;
        a.view_mut((3 * i, 0), (3, 3)).copy_from(&block);
        b.rows_mut(3 * i, 3).copy_from(&rhs);
    }
    let t = a
        .svd(true, true)
        .solve(&b, 1e-12)
        .map_err(|_| SolveError::DegenerateMotion)?;
    Ok(Pose::new(Vector3::new(t[0], t[1], t[2]), rot))
}
