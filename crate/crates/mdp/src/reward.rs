use crate::StateVector;
use serde::{Deserialize, Serialize};
use vical_geom::{euler_distance, Pose};

/// Reward coefficients: step motion costs and terminal-bonus weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardCoeffs {
    /// Weight of the per-step translation cost.
    pub c1: f64,
    /// Weight of the per-step rotation cost.
    pub c2: f64,
    /// Flat terminal bonus.
    pub c3: f64,
    /// Weight of the terminal accuracy ratio.
    pub c4: f64,
}

impl Default for RewardCoeffs {
    fn default() -> Self {
        Self {
            c1: 1.0,
            c2: 0.5,
            c3: 10.0,
            c4: 5.0,
        }
    }
}

/// Per-step reward: L1 growth of the 18 normalized coverage components minus
/// weighted motion costs.
///
/// The rotation cost is the Euclidean norm of the wrapped per-axis Euler
/// differences between the two poses.
pub fn step_reward(
    prev: &StateVector,
    cur: &StateVector,
    prev_pose: &Pose,
    cur_pose: &Pose,
    c1: f64,
    c2: f64,
) -> f64 {
    let coverage_gain: f64 = (0..18).map(|i| (cur[i] - prev[i]).abs()).sum();
    let dp = (cur_pose.position - prev_pose.position).norm();
    let dtheta = euler_distance(prev_pose, cur_pose);
    coverage_gain - c1 * dp - c2 * dtheta
}

/// Cap on the terminal reward, as a multiple of the flat bonus `c3`.
pub const TERMINAL_CAP_FACTOR: f64 = 10.0;

/// Floor of the estimate-error norm inside the terminal reward.
pub const TERMINAL_ERR_FLOOR: f64 = 1e-6;

/// Terminal reward for a successful calibration:
/// `c3 + c4 * |truth| / max(|truth - estimate|, 1e-6)`, capped at `10 * c3`.
///
/// Callers award 0 instead when the solver fails outright; this function
/// only scores solved estimates. Both vectors concatenate the calibration
/// parameters in the same layout and are compared in their stored units.
///
/// # Panics
/// If the two vectors differ in length.
pub fn terminal_reward(truth: &[f64], estimate: &[f64], c3: f64, c4: f64) -> f64 {
    assert_eq!(truth.len(), estimate.len(), "parameter layouts must match");
    let norm: f64 = truth.iter().map(|x| x * x).sum::<f64>().sqrt();
    let err: f64 = truth
        .iter()
        .zip(estimate)
        .map(|(t, e)| (t - e) * (t - e))
        .sum::<f64>()
        .sqrt();
    let reward = c3 + c4 * norm / err.max(TERMINAL_ERR_FLOOR);
    reward.min(TERMINAL_CAP_FACTOR * c3)
}
