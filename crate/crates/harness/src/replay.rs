//! Offline episode-record diagnostics.
//!
//! Reconstructs the coverage state step by step from a stored
//! [`EpisodeRecord`], reporting per-step observation quality and the running
//! terminal statistics. Because records store the exact detections the live
//! episode saw, the reconstruction reproduces the online coverage state
//! bit for bit; the `replay` subcommand uses this to audit an episode (when
//! did it become terminal? was every segment usable for calibration?).

use vical_mdp::{
    init_state, polygon_area_prop, terminal_check, update_state, CoverageState,
    TerminalThresholds,
};
use vical_sim::{Detection, EpisodeRecord};

/// Observation and coverage summary of one recorded step.
#[derive(Debug, Clone)]
pub struct StepDiag {
    pub index: usize,
    /// Executed motion: `[rho, theta, phi, alpha, beta, gamma]`.
    pub action: [f64; 6],
    pub end_position: [f64; 3],
    /// Distance from the end position to the board center, metres.
    pub board_dist: f64,
    /// Detections in this segment / how many saw the whole board.
    pub n_frames: usize,
    pub n_full: usize,
    /// Whether the board was fully visible at the segment's rest tick (the
    /// anchor the motion-pair extraction needs).
    pub rest_anchor: bool,
    /// Whether this segment offers a motion pair: a rest anchor plus a full
    /// view at least `min_pair_dt` later.
    pub pairable: bool,
    /// Board-center pixel range seen during the segment (meaningless when
    /// `n_frames == 0`).
    pub center_lo: [f64; 2],
    pub center_hi: [f64; 2],
    /// Running coverage statistics after folding this step in.
    pub poly_prop: f64,
    pub area_spread: f64,
    pub skew_spread: f64,
    pub dp_max: f64,
    pub dtheta_max: f64,
    pub terminal: bool,
}

/// Step-by-step reconstruction of an episode record.
#[derive(Debug, Clone)]
pub struct ReplayDiag {
    pub steps: Vec<StepDiag>,
    /// First step index after which the terminal condition held.
    pub terminal_step: Option<usize>,
    /// Total executed translation, metres.
    pub path_length: f64,
    pub final_coverage: CoverageState,
}

/// Rebuilds the coverage trajectory of `record` under `thresholds`.
///
/// `min_pair_dt` is the motion-pair gap used only for the `pairable`
/// diagnostic (it does not affect the coverage numbers).
pub fn diagnose_record(
    record: &EpisodeRecord,
    thresholds: &TerminalThresholds,
    min_pair_dt: f64,
) -> ReplayDiag {
    let rig = &record.meta.rig;
    let dt = 1.0 / rig.imu.rate;
    let seg_ticks = (record.meta.segment_duration * rig.imu.rate).round() as u64;
    let board_center = rig.board.center_world();

    let mut steps = Vec::with_capacity(record.meta.steps.len());
    let mut terminal_step = None;
    let mut path_length = 0.0;
    let mut cov = match record.meta.steps.first() {
        Some(s) => init_state(&s.start_pose, rig.intrinsics.width, rig.intrinsics.height),
        None => init_state(
            &vical_geom::Pose::identity(),
            rig.intrinsics.width,
            rig.intrinsics.height,
        ),
    };

    for step in &record.meta.steps {
        let t_start = step.start_tick as f64 * dt;
        let t_end = (step.start_tick + seg_ticks) as f64 * dt;
        let in_step: Vec<&(f64, Detection)> = record
            .frames
            .iter()
            .filter(|(t, _)| *t >= t_start - 0.5 * dt && *t < t_end - 0.5 * dt)
            .collect();

        let full: Vec<&&(f64, Detection)> = in_step.iter().filter(|(_, d)| d.full_view).collect();
        let rest_anchor = full
            .first()
            .is_some_and(|(t, _)| (t - t_start).abs() <= 0.5 * dt);
        let pairable = rest_anchor
            && full
                .last()
                .is_some_and(|(t, _)| t - t_start >= min_pair_dt);

        let mut center_lo = [f64::INFINITY; 2];
        let mut center_hi = [f64::NEG_INFINITY; 2];
        for (_, d) in &in_step {
            for i in 0..2 {
                center_lo[i] = center_lo[i].min(d.center[i]);
                center_hi[i] = center_hi[i].max(d.center[i]);
            }
        }

        let detections: Vec<Detection> = in_step.iter().map(|(_, d)| d.clone()).collect();
        cov = update_state(&cov, &detections, &step.start_pose, &step.end_pose);
        path_length += (step.end_pose.position - step.start_pose.position).norm();

        let terminal = terminal_check(&cov, thresholds);
        if terminal && terminal_step.is_none() {
            terminal_step = Some(step.index);
        }
        steps.push(StepDiag {
            index: step.index,
            action: [
                step.action.rho,
                step.action.theta,
                step.action.phi,
                step.action.alpha,
                step.action.beta,
                step.action.gamma,
            ],
            end_position: [
                step.end_pose.position.x,
                step.end_pose.position.y,
                step.end_pose.position.z,
            ],
            board_dist: (board_center - step.end_pose.position).norm(),
            n_frames: in_step.len(),
            n_full: full.len(),
            rest_anchor,
            pairable,
            center_lo,
            center_hi,
            poly_prop: polygon_area_prop(&cov),
            area_spread: if cov.any_seen { cov.a_max - cov.a_min } else { 0.0 },
            skew_spread: if cov.any_seen {
                cov.eta_max - cov.eta_min
            } else {
                0.0
            },
            dp_max: cov.dp_max,
            dtheta_max: cov.dtheta_max,
            terminal,
        });
    }

    ReplayDiag {
        steps,
        terminal_step,
        path_length,
        final_coverage: cov,
    }
}

/// Renders a replay diagnosis as a fixed-width text table.
pub fn render_diag(diag: &ReplayDiag, thresholds: &TerminalThresholds) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>4} {:>6} {:>22} {:>5} {:>4} {:>4} {:>4} {:>17} {:>6} {:>6} {:>6} {:>6} {:>6} {:>4}",
        "step", "rho", "position", "dist", "nfrm", "full", "pair", "center u,v", "poly",
        "aspr", "sspr", "dpmax", "dthmx", "term"
    );
    for s in &diag.steps {
        let center = if s.n_frames == 0 {
            "-".to_string()
        } else {
            format!(
                "{:.0}-{:.0},{:.0}-{:.0}",
                s.center_lo[0], s.center_hi[0], s.center_lo[1], s.center_hi[1]
            )
        };
        let _ = writeln!(
            out,
            "{:>4} {:>6.3} ({:>6.3},{:>6.3},{:>6.3}) {:>5.2} {:>4} {:>4} {:>4} {:>17} {:>6.3} {:>6.3} {:>6.3} {:>6.3} {:>6.3} {:>4}",
            s.index,
            s.action[0],
            s.end_position[0],
            s.end_position[1],
            s.end_position[2],
            s.board_dist,
            s.n_frames,
            s.n_full,
            if s.pairable { "y" } else { "-" },
            center,
            s.poly_prop,
            s.area_spread,
            s.skew_spread,
            s.dp_max,
            s.dtheta_max,
            if s.terminal { "yes" } else { "-" }
        );
    }
    let _ = writeln!(
        out,
        "thresholds: poly>={} aspr>={} sspr>={} dp>={} dth>={}",
        thresholds.tau_poly,
        thresholds.tau_area,
        thresholds.tau_skew,
        thresholds.tau_p,
        thresholds.tau_theta
    );
    let _ = writeln!(
        out,
        "steps: {}  terminal at: {}  path: {:.3} m",
        diag.steps.len(),
        diag.terminal_step
            .map_or("never".to_string(), |i| i.to_string()),
        diag.path_length
    );
    out
}
