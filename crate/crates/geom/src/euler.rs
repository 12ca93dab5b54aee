use nalgebra::{Rotation3, Vector3};
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

/// The pitch angle is too close to `+-pi/2` for roll and yaw to be separated.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("gimbal lock: pitch {pitch} is within 1e-6 of +-pi/2")]
pub struct GimbalLock {
    pub pitch: f64,
}

/// Pitch margin below which [`rot_to_euler`] refuses to decompose.
const GIMBAL_MARGIN: f64 = 1e-6;

/// Rotation matrix for extrinsic X-Y-Z Euler angles:
/// `Rz(yaw) * Ry(pitch) * Rx(roll)`.
pub fn euler_to_rot(roll: f64, pitch: f64, yaw: f64) -> Rotation3<f64> {
    let rx = Rotation3::from_axis_angle(&Vector3::x_axis(), roll);
    let ry = Rotation3::from_axis_angle(&Vector3::y_axis(), pitch);
    let rz = Rotation3::from_axis_angle(&Vector3::z_axis(), yaw);
    rz * ry * rx
}

/// Recovers `(roll, pitch, yaw)` from a rotation matrix, with
/// `pitch in [-pi/2, pi/2]`.
///
/// Fails with [`GimbalLock`] when `|pitch|` is within `1e-6` of `pi/2`, where
/// roll and yaw are no longer independently observable.
pub fn rot_to_euler(rot: &Rotation3<f64>) -> Result<(f64, f64, f64), GimbalLock> {
    let m = rot.matrix();
    let sp = (-m[(2, 0)]).clamp(-1.0, 1.0);
    let pitch = sp.asin();
    if FRAC_PI_2 - pitch.abs() < GIMBAL_MARGIN {
        return Err(GimbalLock { pitch });
    }
    let roll = m[(2, 1)].atan2(m[(2, 2)]);
    let yaw = m[(1, 0)].atan2(m[(0, 0)]);
    Ok((roll, pitch, yaw))
}

/// Lenient Euler decomposition for state reporting: at the gimbal-lock
/// singularity it pins `roll = 0` and folds everything into yaw instead of
/// failing. Use [`rot_to_euler`] when the caller must know about the
/// singularity.
pub fn rpy_of(rot: &Rotation3<f64>) -> (f64, f64, f64) {
    match rot_to_euler(rot) {
        Ok(rpy) => rpy,
        Err(GimbalLock { pitch }) => {
            let m = rot.matrix();
            // With pitch = +-pi/2 only (yaw -+ roll) is observable; report it
            // as yaw: matrix reduces so that m01 = -cos(yaw -+ roll), etc.
            let yaw = (-m[(0, 1)]).atan2(m[(1, 1)]);
            (0.0, if pitch > 0.0 { FRAC_PI_2 } else { -FRAC_PI_2 }, yaw)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    /// Independent oracle: builds Rz(yaw)*Ry(pitch)*Rx(roll) from scalar
    /// trigonometry and explicit 3x3 matrix products, no nalgebra involved.
    fn euler_matrix_oracle(roll: f64, pitch: f64, yaw: f64) -> [[f64; 3]; 3] {
        let (sr, cr) = roll.sin_cos();
        let (sp, cp) = pitch.sin_cos();
        let (sy, cy) = yaw.sin_cos();
        let rx = [[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]];
        let ry = [[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]];
        let rz = [[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]];
        matmul3(&rz, &matmul3(&ry, &rx))
    }

    fn matmul3(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for (k, bk) in b.iter().enumerate() {
                    out[i][j] += a[i][k] * bk[j];
                }
            }
        }
        out
    }

    #[test]
    fn matches_matrix_product_oracle() {
        let r = euler_to_rot(0.1, 0.2, 0.3);
        let expect = euler_matrix_oracle(0.1, 0.2, 0.3);
        for i in 0..3 {
            for j in 0..3 {
                assert!(
                    (r.matrix()[(i, j)] - expect[i][j]).abs() < 1e-14,
                    "mismatch at ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn matches_oracle_on_random_angles() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let (roll, pitch, yaw) = (
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
            );
            let r = euler_to_rot(roll, pitch, yaw);
            let expect = euler_matrix_oracle(roll, pitch, yaw);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((r.matrix()[(i, j)] - expect[i][j]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn roundtrips_away_from_singularity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let roll = rng.gen_range(-PI..PI);
            let pitch = rng.gen_range(-1.5..1.5);
            let yaw = rng.gen_range(-PI..PI);
            let (r2, p2, y2) = rot_to_euler(&euler_to_rot(roll, pitch, yaw)).unwrap();
            assert!((crate::wrapped_diff(roll, r2)).abs() < 1e-9);
            assert!((pitch - p2).abs() < 1e-9);
            assert!((crate::wrapped_diff(yaw, y2)).abs() < 1e-9);
        }
    }

    #[test]
    fn reports_gimbal_lock_at_half_pi_pitch() {
        let r = euler_to_rot(0.3, FRAC_PI_2, -0.2);
        let err = rot_to_euler(&r).unwrap_err();
        assert!((err.pitch.abs() - FRAC_PI_2).abs() < 1e-6);
    }

    #[test]
    fn lenient_rpy_reproduces_rotation_at_singularity() {
        for &(roll, pitch, yaw) in &[(0.3, FRAC_PI_2, -0.2), (-0.4, -FRAC_PI_2, 0.9)] {
            let r = euler_to_rot(roll, pitch, yaw);
            let (r2, p2, y2) = rpy_of(&r);
            let rebuilt = euler_to_rot(r2, p2, y2);
            // The angles themselves are not unique at the singularity, but the
            // rebuilt rotation must match.
            assert!((r * rebuilt.inverse()).angle() < 1e-9);
        }
    }
}
