//! Simulator for a hand-held visual-inertial rig observing a fixed
//! checkerboard.
//!
//! World frame: `z` up, gravity `(0, 0, -9.81)`. The board stands vertically
//! a fixed distance along `+x` from the workspace origin; the sensor head
//! starts at the origin facing the board center.
//!
//! A simulated episode is a sequence of motion segments. Each segment
//! interpolates the head pose with a minimum-jerk time scaling (rest-to-rest)
//! and produces:
//!
//! * camera frames on a fixed grid (default 10 Hz): checkerboard corner
//!   detections with Gaussian pixel noise, plus per-frame summary statistics
//!   (board center, projected area proportion, corner skew angle);
//! * IMU samples on a finer aligned grid (default 200 Hz): specific force
//!   and angular rate with white noise and random-walk biases that persist
//!   across segments.
//!
//! Everything is driven by explicit seeded RNGs: identical seeds give
//! bitwise-identical outputs.

mod align;
mod board;
mod config;
mod curve;
mod imu;
mod record;
mod rig;
mod segment;

pub use align::face_point;
pub use board::{observe_board, summarize_corners, Detection};
pub use config::SimConfig;
pub use curve::{min_jerk, min_jerk_accel, min_jerk_vel, MotionCurve, SegmentCurve};
pub use imu::{gravity_w, synth_imu, ImuBiasState, ImuSamples, GRAVITY};
pub use record::{
    read_episode, write_episode, EpisodeMeta, EpisodeRecord, RecordError, StepMeta, RECORD_VERSION,
};
pub use rig::{rig_from_draws, sample_rig, BoardSpec, ImuNoise, RigConfig, RigDraws, RigSampleOptions};
pub use segment::{run_segment, SegmentOutput};
