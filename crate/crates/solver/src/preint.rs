use nalgebra::{UnitQuaternion, Vector3};
use vical_geom::Pose;
use vical_sim::ImuSamples;

/// Dead-reckons the IMU over the window `[t0, t1]` and returns the body pose
/// at `t1` expressed in the body frame at `t0`.
///
/// The body is assumed to start at rest; `gravity_b0` is the world gravity
/// vector expressed in the body frame at `t0`, which the integration adds
/// back to the specific-force measurements. Orientation uses midpoint gyro
/// integration, velocity and position use trapezoidal accumulation of the
/// rotated accelerations. Windows with fewer than two samples integrate to
/// the identity.
pub fn preintegrate_imu(
    samples: &ImuSamples,
    t0: f64,
    t1: f64,
    gravity_b0: &Vector3<f64>,
) -> Pose {
    let eps = 1e-9;
    let idx: Vec<usize> = (0..samples.len())
        .filter(|&i| samples.timestamps[i] >= t0 - eps && samples.timestamps[i] <= t1 + eps)
        .collect();
    if idx.len() < 2 {
        return Pose::identity();
    }

    let mut q = UnitQuaternion::identity();
    let mut v = Vector3::zeros();
    let mut p = Vector3::zeros();
    for w in idx.windows(2) {
        let (i, j) = (w[0], w[1]);
        let dt = samples.timestamps[j] - samples.timestamps[i];
        let w_mid = 0.5 * (samples.gyro_at(i) + samples.gyro_at(j));
        let q_next = q * UnitQuaternion::from_scaled_axis(w_mid * dt);
        let a0 = q * samples.accel_at(i) + gravity_b0;
        let a1 = q_next * samples.accel_at(j) + gravity_b0;
        let a_mid = 0.5 * (a0 + a1);
        p += v * dt + 0.5 * a_mid * dt * dt;
        v += a_mid * dt;
        q = q_next;
    }
    Pose::new(p, q)
}
