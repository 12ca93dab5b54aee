use crate::{
    calibrate_intrinsics, hand_eye_solve, pnp_board_pose, preintegrate_imu, CalibOptions,
    CalibResult, SolveError,
};
use serde::{Deserialize, Serialize};
use vical_camera::Intrinsics;
use vical_geom::Pose;
use vical_sim::{gravity_w, EpisodeRecord};

/// Default minimum time between the two detections of a motion pair. Very
/// short baselines make the camera relative pose noise-dominated.
pub const DEFAULT_PAIR_DT: f64 = 0.5;

/// Options for [`solve_record`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecordSolveOptions {
    pub calib: CalibOptions,
    /// Minimum time between the paired detections of one segment, seconds.
    pub min_pair_dt: f64,
}

impl Default for RecordSolveOptions {
    fn default() -> Self {
        Self {
            calib: CalibOptions::default(),
            min_pair_dt: DEFAULT_PAIR_DT,
        }
    }
}

/// Joint calibration output of [`solve_record`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointSolution {
    pub calib: CalibResult,
    /// `[fx, fy, cx, cy, k1, k2, p1, p2]`.
    pub intrinsic_vector: [f64; 8],
    /// Camera-to-IMU `[x, y, z, roll, pitch, yaw]`.
    pub extrinsic_vector: [f64; 6],
    /// Full-view detections available to the intrinsic stage.
    pub n_views: usize,
    /// Motion pairs available to the hand-eye stage.
    pub n_motion_pairs: usize,
}

/// Extracts paired relative motions `(camera, IMU)` from an episode record.
///
/// Each recorded step contributes at most one pair: the detection at the
/// segment start (where the minimum-jerk trajectory is exactly at rest, so
/// IMU double integration starts from zero velocity) and the last full-view
/// detection at least `min_pair_dt` later within the same segment. The
/// camera motion comes from board-pose estimation at the two detections; the
/// IMU motion from dead-reckoning between their timestamps, with the gravity
/// direction at the segment start taken from the rig ground truth stored in
/// the record (a calibration-rig prior). Steps whose board view is lost at
/// either end are skipped.
pub fn extrinsic_pairs(
    record: &EpisodeRecord,
    k: &Intrinsics,
    min_pair_dt: f64,
) -> (Vec<Pose>, Vec<Pose>) {
    let rig = &record.meta.rig;
    let dt = 1.0 / rig.imu.rate;
    let n_seg_ticks = (record.meta.segment_duration * rig.imu.rate).round() as u64;

    let mut cams = Vec::new();
    let mut imus = Vec::new();
    for step in &record.meta.steps {
        let t_start = step.start_tick as f64 * dt;
        let t_end = (step.start_tick + n_seg_ticks) as f64 * dt;
        let in_step: Vec<&(f64, vical_sim::Detection)> = record
            .frames
            .iter()
            .filter(|(t, d)| *t >= t_start - 0.5 * dt && *t < t_end - 0.5 * dt && d.full_view)
            .collect();

        let Some(first) = in_step.first() else { continue };
        if (first.0 - t_start).abs() > 0.5 * dt {
            continue; // board not seen at the rest point; no zero-velocity anchor
        }
        let Some(last) = in_step.last() else { continue };
        if last.0 - first.0 < min_pair_dt {
            continue;
        }

        let (Ok(pnp0), Ok(pnp1)) = (
            pnp_board_pose(&first.1, k, &rig.board),
            pnp_board_pose(&last.1, k, &rig.board),
        ) else {
            continue;
        };
        // Relative camera motion T_C0->C1 from the two board poses.
        let cam_motion = pnp0.compose(&pnp1.inverse());

        let body0 = rig.imu_pose(&step.start_pose);
        let gravity_b0 = body0.rotation().inverse() * gravity_w();
        let imu_motion = preintegrate_imu(&record.imu, first.0, last.0, &gravity_b0);

        cams.push(cam_motion);
        imus.push(imu_motion);
    }
    (cams, imus)
}

/// Camera-to-IMU transform from an episode record with known camera
/// parameters.
pub fn solve_extrinsic_from_record(
    record: &EpisodeRecord,
    k: &Intrinsics,
) -> Result<Pose, SolveError> {
    let (cams, imus) = extrinsic_pairs(record, k, DEFAULT_PAIR_DT);
    hand_eye_solve(&cams, &imus)
}

/// Full joint calibration of an episode record: intrinsics from the board
/// detections, then the camera-to-IMU transform by hand-eye alignment of
/// per-segment camera and IMU motions using the estimated intrinsics.
pub fn solve_record(
    record: &EpisodeRecord,
    opts: &RecordSolveOptions,
) -> Result<JointSolution, SolveError> {
    let t_start = std::time::Instant::now();
    let rig = &record.meta.rig;
    let detections: Vec<vical_sim::Detection> =
        record.frames.iter().map(|(_, d)| d.clone()).collect();
    let mut calib = calibrate_intrinsics(
        &detections,
        &rig.board,
        rig.intrinsics.width,
        rig.intrinsics.height,
        &opts.calib,
    )?;

    let (cams, imus) = extrinsic_pairs(record, &calib.intrinsics, opts.min_pair_dt);
    let n_motion_pairs = cams.len();
    let extrinsic = hand_eye_solve(&cams, &imus)?;

    let n_full = detections.iter().filter(|d| d.full_view).count();
    let k = &calib.intrinsics;
    let (roll, pitch, yaw) = extrinsic.rpy();
    calib.extrinsic = extrinsic;
    calib.solve_time = t_start.elapsed().as_secs_f64();
    Ok(JointSolution {
        intrinsic_vector: [
            k.fx, k.fy, k.cx, k.cy, k.dist.k1, k.dist.k2, k.dist.p1, k.dist.p2,
        ],
        extrinsic_vector: [
            extrinsic.position.x,
            extrinsic.position.y,
            extrinsic.position.z,
            roll,
            pitch,
            yaw,
        ],
        n_views: n_full.min(opts.calib.max_views),
        n_motion_pairs,
        calib,
    })
}
