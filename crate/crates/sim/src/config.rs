use serde::{Deserialize, Serialize};

/// Timing and observation-noise knobs of the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    /// Duration of one motion segment, seconds.
    pub segment_duration: f64,
    /// Camera frame rate, Hz. Must divide the IMU rate so both run on one
    /// aligned time grid.
    pub cam_rate: f64,
    /// Std of the Gaussian noise added to every detected corner coordinate,
    /// pixels.
    pub pixel_noise: f64,
    /// Minimum number of visible corners for a frame to yield a detection.
    /// `None` requires the full board.
    pub min_corners: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            segment_duration: 2.0,
            cam_rate: 10.0,
            pixel_noise: 0.5,
            min_corners: None,
        }
    }
}
