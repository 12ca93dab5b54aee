use crate::{
    observe_board, synth_imu, Detection, ImuBiasState, ImuSamples, MotionCurve, RigConfig,
    SegmentCurve, SimConfig,
};
use rand_chacha::ChaCha8Rng;
use vical_geom::Pose;

/// Everything produced while the camera travels one motion segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentOutput {
    /// Visible board observations as `(timestamp, detection)`.
    pub frames: Vec<(f64, Detection)>,
    /// Inertial measurements covering the segment.
    pub imu: ImuSamples,
    /// Commanded pose at the end of the segment (start of the next one).
    pub curve_end: Pose,
}

/// Simulates one segment from `start` to `end`.
///
/// The camera rides a minimum-jerk curve for `sim.segment_duration` seconds.
/// IMU samples and camera frames live on a single integer tick grid at the
/// IMU rate: sample `k` is stamped `(base_tick + k) / imu.rate`, and frames
/// fall on every `imu.rate / cam_rate`-th tick. Both streams cover the
/// half-open interval `[start, end)` of the segment, so chaining segments
/// with `base_tick += n_imu` yields one gapless, globally monotone episode
/// grid with every frame timestamp exactly on an IMU timestamp.
///
/// The RNG is consumed in a fixed order — all IMU samples first, then one
/// observation per frame slot (whether or not the board is visible) — so a
/// seed fully determines the output.
pub fn run_segment(
    start: &Pose,
    end: &Pose,
    rig: &RigConfig,
    sim: &SimConfig,
    base_tick: u64,
    bias: &mut ImuBiasState,
    rng: &mut ChaCha8Rng,
) -> SegmentOutput {
    let duration = sim.segment_duration;
    let n_imu = (duration * rig.imu.rate).round() as usize;
    let n_cam = (duration * sim.cam_rate).round() as usize;
    assert!(n_cam > 0 && n_imu % n_cam == 0, "camera grid must divide the IMU grid");
    let stride = n_imu / n_cam;
    let dt = 1.0 / rig.imu.rate;

    let curve = SegmentCurve::new(*start, *end, duration);
    let imu = synth_imu(&curve, &rig.t_cam_imu, &rig.imu, base_tick, 0..n_imu, bias, rng);

    let mut frames = Vec::with_capacity(n_cam);
    for m in 0..n_cam {
        let tick = m * stride;
        let pose = curve.pose(tick as f64 * dt);
        let stamp = (base_tick + tick as u64) as f64 * dt;
        if let Some(det) = observe_board(&pose, rig, sim, rng) {
            frames.push((stamp, det));
        }
    }

    SegmentOutput {
        frames,
        imu,
        curve_end: *end,
    }
}
