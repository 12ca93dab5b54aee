use std::f64::consts::PI;
use vical_geom::{Action, ActionBounds};

/// Maps a network action in `[-1, 1]^6` onto the feasible motion box.
///
/// Components: translation distance `rho` in `[0, rho_max]`, azimuth `theta`
/// in `[0, 2pi]`, polar angle `phi` in `[0, pi]`, and the three rotation
/// deltas in `[-rot_max, rot_max]`.
pub fn action_to_env(a: &[f64; 6], bounds: &ActionBounds) -> Action {
    Action::new(
        bounds.rho_max * (a[0] + 1.0) / 2.0,
        PI * (a[1] + 1.0),
        PI * (a[2] + 1.0) / 2.0,
        bounds.rot_max * a[3],
        bounds.rot_max * a[4],
        bounds.rot_max * a[5],
        bounds,
    )
}

/// Inverse of [`action_to_env`] back onto `[-1, 1]^6`.
pub fn env_from_action(action: &Action, bounds: &ActionBounds) -> [f64; 6] {
    [
        2.0 * action.rho / bounds.rho_max - 1.0,
        action.theta / PI - 1.0,
        2.0 * action.phi / PI - 1.0,
        action.alpha / bounds.rot_max,
        action.beta / bounds.rot_max,
        action.gamma / bounds.rot_max,
    ]
}
