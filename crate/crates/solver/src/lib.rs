//! Calibration solvers for a camera-IMU rig observing a planar checkerboard.
//!
//! The intrinsic path runs the classic planar-target pipeline: per-view
//! homographies ([`estimate_homography`]), a closed-form pinhole
//! initialization from the image of the absolute conic ([`zhang_init`]),
//! per-view pose seeds from homography decomposition, and one joint
//! Levenberg-Marquardt refinement ([`calibrate_intrinsics`]) over the
//! intrinsics, two radial and two tangential distortion coefficients, and
//! all view poses.
//!
//! The extrinsic path estimates the camera-to-IMU transform by hand-eye
//! alignment ([`hand_eye_solve`]) of per-segment relative motions: camera
//! motions from board-pose estimates ([`pnp_board_pose`]) and IMU motions
//! from gyro/accelerometer preintegration ([`preintegrate_imu`]).
//!
//! [`solve_record`] wires both paths to an on-disk episode recording.

mod handeye;
mod homography;
mod intrinsics;
mod lm;
mod metrics;
mod offline;
mod pnp;
mod preint;
mod zhang;

pub use handeye::hand_eye_solve;
pub use homography::estimate_homography;
pub use intrinsics::{
    calibrate_intrinsics, decompose_homography, project_param, project_param_jacobian,
    CalibOptions, CalibResult, INTRINSIC_DIM,
};
pub use lm::{fd_jacobian, lm_solve, LmOptions, LmReport, NllsProblem};
pub use metrics::percent_error;
pub use offline::{
    extrinsic_pairs, solve_extrinsic_from_record, solve_record, JointSolution, RecordSolveOptions,
};
pub use pnp::pnp_board_pose;
pub use preint::preintegrate_imu;

/// Errors shared by the calibration operations.
#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("not enough data: {0}")]
    InsufficientData(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("relative rotations share one axis; the extrinsic is unobservable")]
    DegenerateMotion,
    #[error("zero truth vector has no relative error")]
    ZeroTruth,
}
