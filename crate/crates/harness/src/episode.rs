//! The environment loop: one episode of policy-driven data collection.
//!
//! Each step maps a raw policy action onto a feasible motion (clamped to the
//! workspace box along its translation ray), simulates the segment, folds
//! the observations into the coverage state, and scores the step. When the
//! coverage thresholds are all met the episode ends and the calibrator runs
//! exactly once; running out of steps ends the episode without calibration
//! and without marking the final transition terminal.

use crate::{CalibOutcome, Calibrator, HarnessConfig};
use crate::policy::Policy;
use rand_chacha::ChaCha8Rng;
use vical_geom::{apply_action, Action, ActionBounds, Pose};
use vical_mdp::{
    init_state, step_reward, terminal_check, terminal_reward, to_vector, update_state,
    CoverageState, StateVector,
};
use vical_rl::{action_to_env, Transition};
use vical_sim::{
    face_point, run_segment, Detection, EpisodeMeta, EpisodeRecord, ImuBiasState, ImuSamples,
    RigConfig, StepMeta, RECORD_VERSION,
};

/// Axis-aligned workspace bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkspaceBox {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl WorkspaceBox {
    /// A box of the given full extents centered on `center`.
    pub fn centered(center: &[f64; 3], extents: &[f64; 3]) -> Self {
        let mut min = [0.0; 3];
        let mut max = [0.0; 3];
        for i in 0..3 {
            min[i] = center[i] - extents[i] / 2.0;
            max[i] = center[i] + extents[i] / 2.0;
        }
        Self { min, max }
    }

    pub fn contains(&self, p: &[f64; 3], tol: f64) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] - tol && p[i] <= self.max[i] + tol)
    }
}

/// Shrinks the translation of `action` so its endpoint stays inside `bbox`,
/// preserving the translation direction and all rotation components.
pub fn clamp_action_to_box(
    pose: &Pose,
    action: &Action,
    bbox: &WorkspaceBox,
    bounds: &ActionBounds,
) -> Action {
    let t = action.translation();
    if action.rho == 0.0 {
        return *action;
    }
    let mut s: f64 = 1.0;
    for i in 0..3 {
        let p = pose.position[i];
        if t[i] > 1e-12 {
            s = s.min((bbox.max[i] - p) / t[i]);
        } else if t[i] < -1e-12 {
            s = s.min((bbox.min[i] - p) / t[i]);
        }
    }
    let s = s.clamp(0.0, 1.0);
    if s >= 1.0 {
        *action
    } else {
        Action::new(
            action.rho * s,
            action.theta,
            action.phi,
            action.alpha,
            action.beta,
            action.gamma,
            bounds,
        )
    }
}

/// Everything one episode produced.
#[derive(Debug, Clone)]
pub struct EpisodeOutcome {
    pub record: EpisodeRecord,
    pub coverage: CoverageState,
    /// Replay-ready transitions; `done` is set only by the terminal
    /// condition, never by the step cap.
    pub transitions: Vec<Transition>,
    /// Present exactly when the terminal condition fired (and the episode's
    /// calibrator was not [`Calibrator::Skip`]).
    pub calib: Option<CalibOutcome>,
    pub terminal: bool,
    pub episode_return: f64,
    /// Total commanded translation, metres (sum of executed step lengths).
    pub path_length: f64,
    /// Wall time of the terminal calibration, seconds (0 when none ran).
    pub solve_time: f64,
}

impl EpisodeOutcome {
    pub fn steps(&self) -> usize {
        self.record.meta.steps.len()
    }
}

/// Incremental episode driver, stepped one action at a time so a training
/// loop can interleave gradient updates with data collection.
pub struct EpisodeSim<'a> {
    cfg: &'a HarnessConfig,
    rig: &'a RigConfig,
    calibrator: &'a Calibrator,
    bbox: WorkspaceBox,
    pose: Pose,
    coverage: CoverageState,
    state: StateVector,
    bias: ImuBiasState,
    base_tick: u64,
    seg_ticks: u64,
    steps: Vec<StepMeta>,
    frames: Vec<(f64, Detection)>,
    imu: ImuSamples,
    transitions: Vec<Transition>,
    episode_seed: u64,
    terminal: bool,
    calib: Option<CalibOutcome>,
    episode_return: f64,
    solve_time: f64,
}

impl<'a> EpisodeSim<'a> {
    /// Starts an episode at the configured start position, auto-aligned to
    /// face the board center.
    pub fn new(
        cfg: &'a HarnessConfig,
        rig: &'a RigConfig,
        calibrator: &'a Calibrator,
        episode_seed: u64,
    ) -> Self {
        let start_pos = nalgebra::Vector3::from(cfg.episode.start_position);
        let pose = face_point(&start_pos, &rig.board.pose.position);
        let (w, h) = (rig.intrinsics.width, rig.intrinsics.height);
        let coverage = init_state(&pose, w, h);
        let state = to_vector(&coverage);
        let seg_ticks = (cfg.sim.segment_duration * rig.imu.rate).round() as u64;
        Self {
            cfg,
            rig,
            calibrator,
            bbox: WorkspaceBox::centered(&cfg.episode.start_position, &cfg.episode.workspace),
            pose,
            coverage,
            state,
            bias: ImuBiasState::default(),
            base_tick: 0,
            seg_ticks,
            steps: Vec::new(),
            frames: Vec::new(),
            imu: ImuSamples::default(),
            transitions: Vec::new(),
            episode_seed,
            terminal: false,
            calib: None,
            episode_return: 0.0,
            solve_time: 0.0,
        }
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn pose(&self) -> &Pose {
        &self.pose
    }

    pub fn coverage(&self) -> &CoverageState {
        &self.coverage
    }

    pub fn done(&self) -> bool {
        self.terminal || self.steps.len() >= self.cfg.episode.max_steps
    }

    fn record(&self) -> EpisodeRecord {
        EpisodeRecord {
            meta: EpisodeMeta {
                version: RECORD_VERSION,
                seed: self.episode_seed,
                rig: self.rig.clone(),
                segment_duration: self.cfg.sim.segment_duration,
                steps: self.steps.clone(),
            },
            frames: self.frames.clone(),
            imu: self.imu.clone(),
        }
    }

    /// Executes one raw policy action. Returns the transition it produced.
    pub fn step(&mut self, raw: [f64; 6], rng: &mut ChaCha8Rng) -> &Transition {
        assert!(!self.done(), "episode already finished");
        let bounds = &self.cfg.episode.bounds;
        let action = action_to_env(&raw, bounds);
        let action = clamp_action_to_box(&self.pose, &action, &self.bbox, bounds);
        let end = apply_action(&self.pose, &action);

        let seg = run_segment(
            &self.pose,
            &end,
            self.rig,
            &self.cfg.sim,
            self.base_tick,
            &mut self.bias,
            rng,
        );
        self.steps.push(StepMeta {
            index: self.steps.len(),
            start_tick: self.base_tick,
            start_pose: self.pose,
            end_pose: end,
            action,
        });
        self.frames.extend(seg.frames.iter().cloned());
        self.imu.extend(&seg.imu);
        self.base_tick += self.seg_ticks;

        let detections: Vec<Detection> = seg.frames.into_iter().map(|(_, d)| d).collect();
        let next_coverage = update_state(&self.coverage, &detections, &self.pose, &end);
        let next_state = to_vector(&next_coverage);
        let coeffs = &self.cfg.reward;
        let mut reward = step_reward(&self.state, &next_state, &self.pose, &end, coeffs.c1, coeffs.c2);

        let terminal = terminal_check(&next_coverage, &self.cfg.thresholds);
        if terminal {
            self.terminal = true;
            let t0 = std::time::Instant::now();
            let outcome = self.calibrator.solve(&self.record(), self.rig, rng);
            self.solve_time = t0.elapsed().as_secs_f64();
            if let Some(outcome) = outcome {
                let truth = crate::truth_vector(self.rig);
                reward += match outcome.estimate() {
                    Some(est) => terminal_reward(&truth, &est, coeffs.c3, coeffs.c4),
                    None => 0.0,
                };
                self.calib = Some(outcome);
            }
        }

        self.transitions.push(Transition {
            state: self.state.to_vec(),
            action: raw.to_vec(),
            reward,
            next_state: next_state.to_vec(),
            done: terminal,
        });
        self.episode_return += reward;
        self.coverage = next_coverage;
        self.state = next_state;
        self.pose = end;
        self.transitions.last().unwrap()
    }

    pub fn finish(self) -> EpisodeOutcome {
        let record = EpisodeRecord {
            meta: EpisodeMeta {
                version: RECORD_VERSION,
                seed: self.episode_seed,
                rig: self.rig.clone(),
                segment_duration: self.cfg.sim.segment_duration,
                steps: self.steps,
            },
            frames: self.frames,
            imu: self.imu,
        };
        let path_length = record.meta.steps.iter().map(|s| s.action.rho).sum();
        EpisodeOutcome {
            record,
            coverage: self.coverage,
            transitions: self.transitions,
            calib: self.calib,
            terminal: self.terminal,
            episode_return: self.episode_return,
            path_length,
            solve_time: self.solve_time,
        }
    }
}

/// Runs one full episode under `policy`.
pub fn run_episode(
    policy: &mut dyn Policy,
    rig: &RigConfig,
    cfg: &HarnessConfig,
    calibrator: &Calibrator,
    episode_seed: u64,
    rng: &mut ChaCha8Rng,
) -> EpisodeOutcome {
    policy.begin_episode();
    let mut sim = EpisodeSim::new(cfg, rig, calibrator, episode_seed);
    while !sim.done() {
        let raw = policy.act(&sim.state, rng);
        sim.step(raw, rng);
    }
    sim.finish()
}
