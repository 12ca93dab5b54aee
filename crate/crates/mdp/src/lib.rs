//! The data-acquisition MDP for joint camera/IMU calibration.
//!
//! An episode drives a camera rig through motion segments; each segment's
//! board observations are folded into a [`CoverageState`] tracking how much
//! of the image the board's center has swept (four per-region vertices), the
//! range of apparent board sizes and skew angles, and the largest per-step
//! pose change. [`to_vector`] normalizes that into the 24-dimensional state
//! fed to the policy, [`step_reward`] pays for normalized coverage growth
//! minus motion cost, and [`terminal_reward`] pays a calibration-accuracy
//! bonus once [`terminal_check`] says the collected data is diverse enough.

mod reward;
mod state;
mod vector;

pub use reward::{step_reward, terminal_reward, RewardCoeffs};
pub use state::{
    init_state, polygon_area_prop, terminal_check, update_state, CoverageState, Region,
    TerminalThresholds,
};
pub use vector::{
    to_vector, StateVector, A_REF_HI, A_REF_LO, DP_REF, DTHETA_REF, ETA_CENTER, ETA_SPAN,
    STATE_DIM,
};
