use crate::{ImuNoise, MotionCurve};
use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use vical_geom::Pose;

/// Gravitational acceleration magnitude, m/s^2.
pub const GRAVITY: f64 = 9.81;

/// World-frame gravity vector `(0, 0, -9.81)`.
pub fn gravity_w() -> Vector3<f64> {
    Vector3::new(0.0, 0.0, -GRAVITY)
}

/// A block of IMU measurements on a uniform time grid.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ImuSamples {
    pub timestamps: Vec<f64>,
    /// Specific force in the IMU frame, m/s^2.
    pub accel: Vec<[f64; 3]>,
    /// Angular rate in the IMU frame, rad/s.
    pub gyro: Vec<[f64; 3]>,
}

impl ImuSamples {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn accel_at(&self, i: usize) -> Vector3<f64> {
        Vector3::from(self.accel[i])
    }

    pub fn gyro_at(&self, i: usize) -> Vector3<f64> {
        Vector3::from(self.gyro[i])
    }

    pub fn extend(&mut self, other: &ImuSamples) {
        self.timestamps.extend_from_slice(&other.timestamps);
        self.accel.extend_from_slice(&other.accel);
        self.gyro.extend_from_slice(&other.gyro);
    }
}

/// Random-walk bias state, carried across the segments of one episode.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ImuBiasState {
    pub accel: Vector3<f64>,
    pub gyro: Vector3<f64>,
}

fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Synthesizes IMU measurements for the rigidly attached IMU frame while the
/// camera frame rides `curve`.
///
/// `t_cam_imu` maps camera coordinates to IMU coordinates, so the IMU pose is
/// `camera_pose * t_cam_imu^-1`. Measurements follow
///
/// ```text
/// gyro  = omega_B + b_g + n_g
/// accel = R_WB^T (xdd_B - g_W) + b_a + n_a
/// ```
///
/// where `xdd_B` is the world acceleration of the IMU origin (including the
/// lever-arm effect of rotating about the camera origin) and `g_W` is
/// `(0, 0, -9.81)`.
///
/// Sample `k` of `sample_range` lies at curve time `k * dt` and is stamped
/// `(curve_start_tick + k) * dt`, with `dt = 1 / noise.rate`; an episode
/// passes a contiguous tick range per segment so all stamps live on one
/// global grid. Per sample the RNG is consumed in a fixed order (accel bias
/// walk, gyro bias walk, accel noise, gyro noise; 3 draws each), which makes
/// a split range reproduce the unsplit one exactly.
pub fn synth_imu(
    curve: &dyn MotionCurve,
    t_cam_imu: &Pose,
    noise: &ImuNoise,
    curve_start_tick: u64,
    sample_range: std::ops::Range<usize>,
    bias: &mut ImuBiasState,
    rng: &mut ChaCha8Rng,
) -> ImuSamples {
    let dt = 1.0 / noise.rate;
    let sqrt_dt = dt.sqrt();
    let t_imu_cam = t_cam_imu.inverse();
    // IMU origin in the camera frame (lever arm) and cam->imu rotation.
    let lever = t_imu_cam.position;
    let r_bc = t_cam_imu.rotation();
    let g = gravity_w();

    let n = sample_range.len();
    let mut out = ImuSamples {
        timestamps: Vec::with_capacity(n),
        accel: Vec::with_capacity(n),
        gyro: Vec::with_capacity(n),
    };
    let mut normal = |std: f64| -> Vector3<f64> {
        let z: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        Vector3::new(z[0], z[1], z[2]) * std
    };
    for k in sample_range {
        let t_local = k as f64 * dt;
        let cam = curve.pose(t_local);
        let omega_c = curve.angular_velocity_body(t_local);
        let omega_dot_c = curve.angular_acceleration_body(t_local);
        let acc_cam_w = curve.acceleration_world(t_local);

        let r_wc = cam.rotation();
        let r_wb = r_wc * t_imu_cam.rotation();
        // xdd_B = xdd_C + R_WC (omega^ omega^ + omegadot^) * lever.
        let spin = skew(&omega_c) * skew(&omega_c) + skew(&omega_dot_c);
        let acc_imu_w = acc_cam_w + r_wc * (spin * lever);
        let omega_b = r_bc * omega_c;

        bias.accel += normal(noise.accel_drift * sqrt_dt);
        bias.gyro += normal(noise.gyro_drift * sqrt_dt);
        let accel = r_wb.transpose() * (acc_imu_w - g) + bias.accel + normal(noise.accel_noise);
        let gyro = omega_b + bias.gyro + normal(noise.gyro_noise);

        out.timestamps.push((curve_start_tick + k as u64) as f64 * dt);
        out.accel.push([accel.x, accel.y, accel.z]);
        out.gyro.push([gyro.x, gyro.y, gyro.z]);
    }
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::SegmentCurve;
    use nalgebra::UnitQuaternion;
    use rand::SeedableRng;

    /// Static hover at a fixed pose.
    pub(crate) struct ConstPose(pub Pose);

    impl MotionCurve for ConstPose {
        fn duration(&self) -> f64 {
            f64::INFINITY
        }
        fn pose(&self, _t: f64) -> Pose {
            self.0
        }
        fn angular_velocity_body(&self, _t: f64) -> Vector3<f64> {
            Vector3::zeros()
        }
        fn angular_acceleration_body(&self, _t: f64) -> Vector3<f64> {
            Vector3::zeros()
        }
        fn acceleration_world(&self, _t: f64) -> Vector3<f64> {
            Vector3::zeros()
        }
    }

    /// Constant world acceleration, identity orientation.
    struct ConstAccel(Vector3<f64>);

    impl MotionCurve for ConstAccel {
        fn duration(&self) -> f64 {
            f64::INFINITY
        }
        fn pose(&self, t: f64) -> Pose {
            Pose::new(self.0 * (0.5 * t * t), UnitQuaternion::identity())
        }
        fn angular_velocity_body(&self, _t: f64) -> Vector3<f64> {
            Vector3::zeros()
        }
        fn angular_acceleration_body(&self, _t: f64) -> Vector3<f64> {
            Vector3::zeros()
        }
        fn acceleration_world(&self, _t: f64) -> Vector3<f64> {
            self.0
        }
    }

    fn silent() -> ImuNoise {
        ImuNoise::default().silent()
    }

    #[test]
    fn static_pose_measures_minus_gravity() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let mut bias = ImuBiasState::default();
        let curve = ConstPose(Pose::identity());
        let s = synth_imu(
            &curve,
            &Pose::identity(),
            &silent(),
            0,
            0..10,
            &mut bias,
            &mut rng,
        );
        for i in 0..s.len() {
            assert_eq!(s.gyro[i], [0.0, 0.0, 0.0]);
            let a = s.accel_at(i);
            assert!((a - Vector3::new(0.0, 0.0, GRAVITY)).norm() < 1e-15);
        }

        // Arbitrary static orientation: gyro stays zero, |accel| = g.
        let pose = Pose::from_rpy(Vector3::new(0.3, 0.2, -0.5), 0.4, -0.7, 1.1);
        let ext = Pose::from_rpy(Vector3::new(0.06, 0.0, -0.1), 0.0, 0.0, 1.57);
        let s = synth_imu(
            &ConstPose(pose),
            &ext,
            &silent(),
            0,
            0..5,
            &mut bias,
            &mut rng,
        );
        for i in 0..s.len() {
            assert!(s.gyro_at(i).norm() < 1e-15);
            assert!((s.accel_at(i).norm() - GRAVITY).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_world_acceleration_reads_a_minus_g() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let mut bias = ImuBiasState::default();
        let a = Vector3::new(0.7, -0.2, 0.4);
        let s = synth_imu(
            &ConstAccel(a),
            &Pose::identity(),
            &silent(),
            0,
            0..5,
            &mut bias,
            &mut rng,
        );
        for i in 0..s.len() {
            assert!((s.accel_at(i) - (a - gravity_w())).norm() < 1e-14);
        }
    }

    fn test_curve() -> SegmentCurve {
        let start = Pose::from_rpy(Vector3::new(0.0, 0.1, -0.1), 0.1, -0.2, 0.3);
        let end = Pose::from_rpy(Vector3::new(0.25, -0.15, 0.2), -0.15, 0.1, 0.65);
        SegmentCurve::new(start, end, 2.0)
    }

    fn test_extrinsic() -> Pose {
        Pose::from_rpy(Vector3::new(0.06, 0.01, -0.1), 0.02, -0.03, 1.57)
    }

    #[test]
    fn analytic_measurements_match_pose_finite_differences() {
        // Oracle: numerically differentiate the *IMU frame* pose sequence at
        // the sample rate and rebuild ideal measurements from those
        // differences alone.
        let curve = test_curve();
        let ext = test_extrinsic();
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let mut bias = ImuBiasState::default();
        let s = synth_imu(&curve, &ext, &silent(), 0, 0..400, &mut bias, &mut rng);

        let imu_pose = |t: f64| -> Pose { curve.pose(t).compose(&ext.inverse()) };
        let dt = 1.0 / 200.0;
        let h = dt;
        let g = gravity_w();
        for k in 1..399 {
            let t = k as f64 * dt;
            let pm = imu_pose(t - h);
            let p0 = imu_pose(t);
            let pp = imu_pose(t + h);
            let fd_acc_w = (pp.position - 2.0 * p0.position + pm.position) / (h * h);
            let expect_accel = p0.rotation().transpose() * (fd_acc_w - g);
            let fd_omega = (pm.orientation.inverse() * pp.orientation).scaled_axis() / (2.0 * h);
            let da = (s.accel_at(k) - expect_accel).norm();
            let dw = (s.gyro_at(k) - fd_omega).norm();
            assert!(da < 1e-3, "accel mismatch {da:.2e} at k={k}");
            assert!(dw < 1e-3, "gyro mismatch {dw:.2e} at k={k}");
        }
    }

    #[test]
    fn euler_dead_reckoning_recovers_segment_end_pose() {
        let curve = test_curve();
        let ext = test_extrinsic();
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let mut bias = ImuBiasState::default();
        let s = synth_imu(&curve, &ext, &silent(), 0, 0..400, &mut bias, &mut rng);

        let dt = 1.0 / 200.0;
        let g = gravity_w();
        let start = curve.pose(0.0).compose(&ext.inverse());
        let target = curve.pose(2.0).compose(&ext.inverse());
        let mut q = start.orientation;
        let mut p = start.position;
        let mut v = Vector3::zeros();
        for k in 0..s.len() {
            let a_w = q * s.accel_at(k) + g;
            p += v * dt;
            v += a_w * dt;
            q *= UnitQuaternion::from_scaled_axis(s.gyro_at(k) * dt);
        }
        assert!((p - target.position).norm() < 1e-2, "pos err {}", (p - target.position).norm());
        assert!(q.angle_to(&target.orientation) < 1e-2);
    }

    #[test]
    fn split_sample_ranges_reproduce_the_unsplit_stream() {
        let curve = test_curve();
        let ext = test_extrinsic();
        let noise = ImuNoise::default();

        let mut rng_a = ChaCha8Rng::seed_from_u64(65);
        let mut bias_a = ImuBiasState::default();
        let full = synth_imu(&curve, &ext, &noise, 0, 0..400, &mut bias_a, &mut rng_a);

        let mut rng_b = ChaCha8Rng::seed_from_u64(65);
        let mut bias_b = ImuBiasState::default();
        let mut first = synth_imu(&curve, &ext, &noise, 0, 0..200, &mut bias_b, &mut rng_b);
        let second = synth_imu(&curve, &ext, &noise, 0, 200..400, &mut bias_b, &mut rng_b);
        first.extend(&second);

        assert_eq!(full, first);
        assert_eq!(bias_a, bias_b);
    }

    #[test]
    fn bias_random_walk_has_expected_scale() {
        // After n steps the bias std is drift * sqrt(n * dt); check the
        // empirical std over many independent walks.
        let noise = ImuNoise {
            accel_noise: 0.0,
            gyro_noise: 0.0,
            ..ImuNoise::default()
        };
        let curve = ConstPose(Pose::identity());
        let mut rng = ChaCha8Rng::seed_from_u64(66);
        let n_walks = 400;
        let n_steps = 400;
        let mut sum_sq = 0.0;
        for _ in 0..n_walks {
            let mut bias = ImuBiasState::default();
            let _ = synth_imu(
                &curve,
                &Pose::identity(),
                &noise,
                0,
                0..n_steps,
                &mut bias,
                &mut rng,
            );
            sum_sq += bias.accel.x * bias.accel.x;
        }
        let emp_std = (sum_sq / n_walks as f64).sqrt();
        let expect = noise.accel_drift * (n_steps as f64 / noise.rate).sqrt();
        assert!(
            (emp_std - expect).abs() / expect < 0.15,
            "empirical {emp_std:.3e} vs expected {expect:.3e}"
        );
    }
}
