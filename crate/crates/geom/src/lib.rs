//! Rigid-body geometry for a sensor head moving through a fixed world frame.
//!
//! Conventions used throughout the workspace:
//!
//! * World frame: right-handed, `z` up. Gravity points along `-z`.
//! * Orientations are unit quaternions; Euler angles `(roll, pitch, yaw)`
//!   always mean the extrinsic X-Y-Z convention, i.e. the rotation matrix
//!   `Rz(yaw) * Ry(pitch) * Rx(roll)`.
//! * Motion increments ([`Action`]) are expressed in the world frame: the
//!   translation is added to the position and the rotation increment is
//!   left-multiplied onto the orientation.
//! * Angle differences are wrapped to `(-pi, pi]`.

mod action;
mod angle;
mod euler;
mod pose;


pub use action::{apply_action, spherical_translation, Action, ActionBounds};
pub use angle::{wrap_angle, wrapped_diff};
pub use euler::{euler_to_rot, rot_to_euler, rpy_of, GimbalLock};
pub use pose::{euler_distance, Pose};
