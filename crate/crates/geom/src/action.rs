use crate::{euler_to_rot, Pose};
use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Box constraints for a single motion increment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ActionBounds {
    /// Maximum translation distance per step, metres.
    pub rho_max: f64,
    /// Maximum per-axis rotation increment per step, radians.
    pub rot_max: f64,
}

impl Default for ActionBounds {
    fn default() -> Self {
        Self {
            rho_max: 0.3,
            rot_max: 0.3,
        }
    }
}

/// One motion increment: a translation in spherical coordinates plus a
/// world-frame rotation increment as extrinsic X-Y-Z Euler angles.
///
/// Construction clamps every component into the configured bounds, so a
/// stored `Action` is always feasible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    /// Translation distance, metres, in `[0, rho_max]`.
    pub rho: f64,
    /// Translation azimuth, radians, wrapped to `[0, 2*pi)`.
    pub theta: f64,
    /// Translation inclination from `+z`, radians, in `[0, pi]`.
    pub phi: f64,
    /// Roll increment, radians, in `[-rot_max, rot_max]`.
    pub alpha: f64,
    /// Pitch increment, radians, in `[-rot_max, rot_max]`.
    pub beta: f64,
    /// Yaw increment, radians, in `[-rot_max, rot_max]`.
    pub gamma: f64,
}

impl Action {
    pub fn new(
        rho: f64,
        theta: f64,
        phi: f64,
        alpha: f64,
        beta: f64,
        gamma: f64,
        bounds: &ActionBounds,
    ) -> Self {
        Self {
            rho: rho.clamp(0.0, bounds.rho_max),
            theta: theta.rem_euclid(TAU),
            phi: phi.clamp(0.0, PI),
            alpha: alpha.clamp(-bounds.rot_max, bounds.rot_max),
            beta: beta.clamp(-bounds.rot_max, bounds.rot_max),
            gamma: gamma.clamp(-bounds.rot_max, bounds.rot_max),
        }
    }

    /// The zero motion: no translation, no rotation.
    pub fn null() -> Self {
        Self {
            rho: 0.0,
            theta: 0.0,
            phi: 0.0,
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
        }
    }

    /// World-frame translation vector of this action.
    pub fn translation(&self) -> Vector3<f64> {
        spherical_translation(self.rho, self.theta, self.phi)
    }
}

/// Converts spherical coordinates `(rho, theta, phi)` into a Cartesian
/// translation: `rho * [sin(phi)cos(theta), sin(phi)sin(theta), cos(phi)]`.
pub fn spherical_translation(rho: f64, theta: f64, phi: f64) -> Vector3<f64> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vector3::new(rho * sp * ct, rho * sp * st, rho * cp)
}

/// Applies a motion increment in the world frame: the translation is added
/// to the position and the rotation increment is left-multiplied onto the
/// orientation (so the head rotates about its own origin, expressed in world
/// axes).
pub fn apply_action(pose: &Pose, action: &Action) -> Pose {
    let delta_q = UnitQuaternion::from_rotation_matrix(&euler_to_rot(
        action.alpha,
        action.beta,
        action.gamma,
    ));
    Pose::new(
        pose.position + action.translation(),
        delta_q * pose.orientation,
    )
}
