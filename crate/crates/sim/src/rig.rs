use crate::face_point;
use nalgebra::{Vector2, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use vical_camera::{Intrinsics, RadTan};
use vical_geom::Pose;

/// IMU rate and noise densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImuNoise {
    /// Sample rate, Hz.
    pub rate: f64,
    /// White accelerometer noise, m/s^2 per sample (std).
    pub accel_noise: f64,
    /// Accelerometer bias drift, m/s^2: random-walk increment std per sample
    /// is `accel_drift * sqrt(dt)`.
    pub accel_drift: f64,
    /// White gyroscope noise, rad/s per sample (std).
    pub gyro_noise: f64,
    /// Gyroscope bias drift, rad/s, random walk as for the accelerometer.
    pub gyro_drift: f64,
}

impl Default for ImuNoise {
    fn default() -> Self {
        Self {
            rate: 200.0,
            accel_noise: 0.004,
            accel_drift: 0.006,
            gyro_noise: 0.0003394,
            gyro_drift: 0.000038785,
        }
    }
}

impl ImuNoise {
    /// A noiseless variant with the same rate (useful for oracle tests).
    pub fn silent(&self) -> Self {
        Self {
            rate: self.rate,
            accel_noise: 0.0,
            accel_drift: 0.0,
            gyro_noise: 0.0,
            gyro_drift: 0.0,
        }
    }
}

/// Planar checkerboard described by its grid of interior corners.
///
/// Corner `(row, col)` has id `row * cols + col`. The grid is centered on the
/// board pose origin and lies in the board-frame `z = 0` plane, with columns
/// along board `+x` and rows along board `+y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoardSpec {
    /// Interior corner rows.
    pub rows: usize,
    /// Interior corner columns.
    pub cols: usize,
    /// Square side length, metres.
    pub square: f64,
    /// Board frame in the world.
    pub pose: Pose,
}

impl BoardSpec {
    /// The default board: 6 x 7 interior corners of 7 cm squares, standing
    /// vertically `distance` metres along world `+x`, face toward the
    /// workspace origin. Board `+x` runs along world `-y` (image right when
    /// viewed from the origin) and board `+y` along world `-z` (image down).
    pub fn standard(distance: f64) -> Self {
        let position = Vector3::new(distance, 0.0, 0.0);
        // Columns: [-y_w, -z_w, +x_w] as a rotation matrix.
        let pose = Pose::new(
            position,
            face_point(&position, &Vector3::new(2.0 * distance, 0.0, 0.0)).orientation,
        );
        Self {
            rows: 6,
            cols: 7,
            square: 0.07,
            pose,
        }
    }

    pub fn n_corners(&self) -> usize {
        self.rows * self.cols
    }

    pub fn corner_id(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    /// Board-frame position of corner `(row, col)`, grid centered on origin.
    pub fn corner_local(&self, row: usize, col: usize) -> Vector3<f64> {
        let x = (col as f64 - (self.cols as f64 - 1.0) / 2.0) * self.square;
        let y = (row as f64 - (self.rows as f64 - 1.0) / 2.0) * self.square;
        Vector3::new(x, y, 0.0)
    }

    pub fn corner_world(&self, row: usize, col: usize) -> Vector3<f64> {
        self.pose.transform_point(&self.corner_local(row, col))
    }

    pub fn center_world(&self) -> Vector3<f64> {
        self.pose.position
    }

    /// Ids of the four extreme corners in perimeter order:
    /// `(0,0), (0,cols-1), (rows-1,cols-1), (rows-1,0)`.
    pub fn outer_corner_ids(&self) -> [usize; 4] {
        [
            self.corner_id(0, 0),
            self.corner_id(0, self.cols - 1),
            self.corner_id(self.rows - 1, self.cols - 1),
            self.corner_id(self.rows - 1, 0),
        ]
    }
}

/// Full ground truth of one simulated sensor rig.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigConfig {
    pub intrinsics: Intrinsics,
    /// Distortion center, pixels. Coincides with the principal point for a
    /// symmetric lens; the sampler can offset it to model an asymmetric one.
    pub dist_center: [f64; 2],
    /// Camera-to-IMU transform: `p_imu = R * p_cam + t`. The IMU pose in the
    /// world is therefore `camera_pose * t_cam_imu^-1`.
    pub t_cam_imu: Pose,
    pub imu: ImuNoise,
    pub board: BoardSpec,
}

impl RigConfig {
    pub fn dist_center_px(&self) -> Vector2<f64> {
        Vector2::new(self.dist_center[0], self.dist_center[1])
    }

    /// World pose of the IMU frame for a given camera pose.
    pub fn imu_pose(&self, camera_pose: &Pose) -> Pose {
        camera_pose.compose(&self.t_cam_imu.inverse())
    }

    /// Ground-truth intrinsic parameter vector
    /// `[fx, fy, cx, cy, k1, k2, p1, p2]`.
    pub fn intrinsic_vector(&self) -> [f64; 8] {
        let k = &self.intrinsics;
        [
            k.fx, k.fy, k.cx, k.cy, k.dist.k1, k.dist.k2, k.dist.p1, k.dist.p2,
        ]
    }

    /// Ground-truth extrinsic parameter vector
    /// `[x, y, z, roll, pitch, yaw]` of the camera-to-IMU transform.
    pub fn extrinsic_vector(&self) -> [f64; 6] {
        let (roll, pitch, yaw) = self.t_cam_imu.rpy();
        let t = self.t_cam_imu.position;
        [t.x, t.y, t.z, roll, pitch, yaw]
    }
}

/// Switches for [`sample_rig`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RigSampleOptions {
    /// Draw the distortion center away from the principal point. When off the
    /// lens is symmetric and the intrinsic ground truth lies inside the model
    /// class fitted by the solver.
    pub asymmetric_distortion_center: bool,
    /// Board distance from the workspace origin, metres.
    pub board_distance: f64,
}

impl Default for RigSampleOptions {
    fn default() -> Self {
        Self {
            asymmetric_distortion_center: true,
            board_distance: 1.5,
        }
    }
}

/// Unit-normal draws behind one rig sample, exposed so tests can pin them.
#[derive(Debug, Clone, Copy, Default)]
pub struct RigDraws {
    pub fov: f64,
    pub k1: f64,
    pub k2: f64,
    pub center: [f64; 2],
    pub ext_xyz: [f64; 3],
    pub ext_rpy: [f64; 3],
}

const IMG_W: f64 = 640.0;
const IMG_H: f64 = 480.0;
/// All Gaussian draws are clamped to this many sigmas.
const CLAMP_SIGMAS: f64 = 5.0;
/// Distortion strength cap keeping fixed-point undistortion contractive.
const K_MAX: f64 = 0.1;

fn gauss(mean: f64, std: f64, z: f64) -> f64 {
    mean + std * z.clamp(-CLAMP_SIGMAS, CLAMP_SIGMAS)
}

/// Deterministic rig construction from unit-normal draws.
///
/// Distributions: FOV ~ N(1.00, 0.05^2) rad; k1, k2 ~ N(0, 0.02^2) capped at
/// +-0.1; distortion center ~ N(0.5 * size, (0.05 * size)^2) per axis;
/// extrinsic translation X ~ N(0.06, 0.01^2), Y ~ N(0, 0.01^2),
/// Z ~ N(-0.10, 0.01^2) metres; roll, pitch ~ N(0, 0.1^2),
/// yaw ~ N(1.57, 0.1^2) rad.
pub fn rig_from_draws(draws: &RigDraws, opts: &RigSampleOptions) -> RigConfig {
    let fov = gauss(1.0, 0.05, draws.fov);
    let dist = RadTan {
        k1: gauss(0.0, 0.02, draws.k1).clamp(-K_MAX, K_MAX),
        k2: gauss(0.0, 0.02, draws.k2).clamp(-K_MAX, K_MAX),
        p1: 0.0,
        p2: 0.0,
    };
    let intrinsics = Intrinsics::from_fov(fov, IMG_W, IMG_H, dist);
    let dist_center = if opts.asymmetric_distortion_center {
        [
            gauss(0.5 * IMG_W, 0.05 * IMG_W, draws.center[0]),
            gauss(0.5 * IMG_H, 0.05 * IMG_H, draws.center[1]),
        ]
    } else {
        [intrinsics.cx, intrinsics.cy]
    };
    let t_cam_imu = Pose::from_rpy(
        Vector3::new(
            gauss(0.06, 0.01, draws.ext_xyz[0]),
            gauss(0.0, 0.01, draws.ext_xyz[1]),
            gauss(-0.10, 0.01, draws.ext_xyz[2]),
        ),
        gauss(0.0, 0.1, draws.ext_rpy[0]),
        gauss(0.0, 0.1, draws.ext_rpy[1]),
        gauss(1.57, 0.1, draws.ext_rpy[2]),
    );
    RigConfig {
        intrinsics,
        dist_center,
        t_cam_imu,
        imu: ImuNoise::default(),
        board: BoardSpec::standard(opts.board_distance),
    }
}

/// Samples a random rig. Deterministic given the RNG state.
pub fn sample_rig(rng: &mut ChaCha8Rng, opts: &RigSampleOptions) -> RigConfig {
    let mut z = || -> f64 { rng.sample(StandardNormal) };
    let draws = RigDraws {
        fov: z(),
        k1: z(),
        k2: z(),
        center: [z(), z()],
        ext_xyz: [z(), z(), z()],
        ext_rpy: [z(), z(), z()],
    };
    rig_from_draws(&draws, opts)
}
