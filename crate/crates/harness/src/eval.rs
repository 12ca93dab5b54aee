//! Evaluation protocol: a fixed panel of sampled rigs, one episode per
//! (policy, rig) pair, scored by offline calibration accuracy and path cost.
//!
//! Rigs are drawn once from RNG stream 0 of the evaluation seed and shared
//! by every policy; each episode gets its own stream (`1 + policy_index *
//! n_rigs + rig_index`), so results are independent of evaluation order and
//! reproducible to the bit for a given seed. Episodes run without a
//! terminal calibrator; scoring solves the recorded episode offline for
//! whichever task is requested.

use crate::{
    run_episode, truth_vector, Calibrator, HarnessConfig, LearnedPolicy, Policy, RandomPolicy,
    ScriptPolicy,
};
use anyhow::{Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;
use vical_solver::{calibrate_intrinsics, percent_error, solve_extrinsic_from_record, solve_record};

/// Which calibration problem the recorded episodes are scored on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Camera intrinsics only, on rigs with a centered distortion model.
    Intrinsic,
    /// Camera-to-IMU transform with the true intrinsics given, on rigs with
    /// a centered distortion model.
    ExtrinsicKnownK,
    /// Intrinsics and extrinsics together under full rig randomization.
    Joint,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::Intrinsic, Task::ExtrinsicKnownK, Task::Joint];

    pub fn label(&self) -> &'static str {
        match self {
            Task::Intrinsic => "intrinsic",
            Task::ExtrinsicKnownK => "extrinsic_known_k",
            Task::Joint => "joint",
        }
    }
}

impl std::str::FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "intrinsic" => Ok(Task::Intrinsic),
            "extrinsic_known_k" => Ok(Task::ExtrinsicKnownK),
            "joint" => Ok(Task::Joint),
            other => Err(format!(
                "unknown task `{other}` (expected intrinsic, extrinsic_known_k, or joint)"
            )),
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("evaluating the learned policy requires a checkpoint (--checkpoint)")]
    MissingCheckpoint,
}

/// One evaluated episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub policy: String,
    pub task: String,
    /// Index of the rig in the shared evaluation panel.
    pub rig: usize,
    /// Calibration accuracy (percent parameter-vector error); empty when the
    /// solve was rejected.
    pub error_pct: Option<f64>,
    /// Total commanded translation, metres.
    pub path_m: f64,
    /// Wall time of the offline solve, seconds.
    pub solve_s: f64,
    pub steps: usize,
    pub terminal: bool,
    /// Why the solve was rejected, when it was.
    pub note: String,
}

/// Per-policy aggregate over the rig panel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicySummary {
    pub policy: String,
    pub episodes: usize,
    /// Episodes whose offline solve succeeded.
    pub solved: usize,
    /// Mean error over solved episodes.
    pub mean_error_pct: Option<f64>,
    /// Mean path over all episodes.
    pub mean_path_m: f64,
    pub mean_steps: f64,
    pub terminal_rate: f64,
    /// Mean solve wall time over solved episodes.
    pub mean_solve_s: f64,
}

/// Everything one evaluation produced.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub task: Task,
    pub seed: u64,
    pub n_rigs: usize,
    pub rows: Vec<EvalRow>,
    pub summaries: Vec<PolicySummary>,
}

/// Recomputes per-policy aggregates from rows (order of first appearance).
pub fn summarize(rows: &[EvalRow]) -> Vec<PolicySummary> {
    let mut order: Vec<&str> = Vec::new();
    for row in rows {
        if !order.contains(&row.policy.as_str()) {
            order.push(&row.policy);
        }
    }
    order
        .iter()
        .map(|name| {
            let rs: Vec<&EvalRow> = rows.iter().filter(|r| r.policy == *name).collect();
            let n = rs.len();
            let solved: Vec<&&EvalRow> = rs.iter().filter(|r| r.error_pct.is_some()).collect();
            let mean = |f: &dyn Fn(&EvalRow) -> f64, set: &[&&EvalRow]| -> f64 {
                if set.is_empty() {
                    0.0
                } else {
                    set.iter().map(|r| f(r)).sum::<f64>() / set.len() as f64
                }
            };
            let all: Vec<&&EvalRow> = rs.iter().collect();
            PolicySummary {
                policy: name.to_string(),
                episodes: n,
                solved: solved.len(),
                mean_error_pct: if solved.is_empty() {
                    None
                } else {
                    Some(mean(&|r| r.error_pct.unwrap(), &solved))
                },
                mean_path_m: mean(&|r| r.path_m, &all),
                mean_steps: mean(&|r| r.steps as f64, &all),
                terminal_rate: mean(&|r| r.terminal as u8 as f64, &all),
                mean_solve_s: mean(&|r| r.solve_s, &solved),
            }
        })
        .collect()
}

impl EvalReport {
    pub fn summary_for(&self, policy: &str) -> Option<&PolicySummary> {
        self.summaries.iter().find(|s| s.policy == policy)
    }

    /// Fixed-width summary table plus a per-episode listing.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "task: {}   rigs: {}   seed: {}",
            self.task, self.n_rigs, self.seed
        );
        let _ = writeln!(
            out,
            "{:<18} {:>8} {:>7} {:>10} {:>11} {:>10} {:>10} {:>12}",
            "policy", "episodes", "solved", "mean_err%", "mean_path_m", "term_rate", "mean_steps", "mean_solve_s"
        );
        for s in &self.summaries {
            let err = s
                .mean_error_pct
                .map_or("-".to_string(), |e| format!("{e:.4}"));
            let _ = writeln!(
                out,
                "{:<18} {:>8} {:>7} {:>10} {:>11.4} {:>10.2} {:>10.2} {:>12.3}",
                s.policy, s.episodes, s.solved, err, s.mean_path_m, s.terminal_rate, s.mean_steps, s.mean_solve_s
            );
        }
        let failures: Vec<&EvalRow> = self.rows.iter().filter(|r| !r.note.is_empty()).collect();
        if !failures.is_empty() {
            let _ = writeln!(out, "rejected solves:");
            for r in failures {
                let _ = writeln!(out, "  {} rig {}: {}", r.policy, r.rig, r.note);
            }
        }
        out
    }

    /// Writes one row per evaluated episode.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)
            .with_context(|| format!("open {}", path.display()))?;
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Canonical content for reproducibility checks: every field except the
    /// wall-clock solve times.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "task={} seed={} rigs={}", self.task, self.seed, self.n_rigs);
        for r in &self.rows {
            let err = r
                .error_pct
                .map_or("-".to_string(), |e| format!("{:.17e}", e));
            let _ = writeln!(
                out,
                "{}|{}|{}|{}|{:.17e}|{}|{}|{}",
                r.policy, r.task, r.rig, err, r.path_m, r.steps, r.terminal, r.note
            );
        }
        out
    }
}

/// The standard evaluation policy set, in reporting order.
///
/// `checkpoint` feeds the learned policy and is required unless
/// `include_learned` is false (the baseline-only benchmark).
pub fn standard_policies(
    cfg: &HarnessConfig,
    checkpoint: Option<&Path>,
    include_learned: bool,
) -> Result<Vec<Box<dyn Policy>>> {
    let mut set: Vec<Box<dyn Policy>> = Vec::new();
    if include_learned {
        let path = checkpoint.ok_or(EvalError::MissingCheckpoint)?;
        let (agent, _, _, _) = vical_rl::load_checkpoint(path)
            .with_context(|| format!("load checkpoint {}", path.display()))?;
        anyhow::ensure!(
            agent.config.state_dim == vical_mdp::STATE_DIM && agent.config.action_dim == 6,
            "checkpoint policy maps {}->{} but the environment needs {}->6",
            agent.config.state_dim,
            agent.config.action_dim,
            vical_mdp::STATE_DIM
        );
        set.push(Box::new(LearnedPolicy {
            agent,
            deterministic: true,
        }));
    }
    set.push(Box::new(RandomPolicy));
    set.push(Box::new(ScriptPolicy::short(&cfg.episode.bounds)));
    set.push(Box::new(ScriptPolicy::long(&cfg.episode.bounds)));
    Ok(set)
}

/// Runs the evaluation protocol for one task. When `records_dir` is given,
/// each episode's record is written under
/// `records_dir/<policy>/rig_<index>/` for later replay.
pub fn evaluate(
    cfg: &HarnessConfig,
    task: Task,
    policies: &mut [Box<dyn Policy>],
    records_dir: Option<&Path>,
) -> Result<EvalReport> {
    let seed = cfg.seed;
    let n_rigs = cfg.eval.n_rigs;

    // The intrinsic-focused tasks pin the distortion center to the principal
    // point; the joint task keeps the full randomization.
    let mut rig_opts = cfg.rig;
    if matches!(task, Task::Intrinsic | Task::ExtrinsicKnownK) {
        rig_opts.asymmetric_distortion_center = false;
    }

    let mut rig_rng = ChaCha8Rng::seed_from_u64(seed);
    rig_rng.set_stream(0);
    let rigs: Vec<_> = (0..n_rigs)
        .map(|_| vical_sim::sample_rig(&mut rig_rng, &rig_opts))
        .collect();

    let mut rows = Vec::with_capacity(policies.len() * n_rigs);
    for (p, policy) in policies.iter_mut().enumerate() {
        for (r, rig) in rigs.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((1 + p * n_rigs + r) as u64);
            let episode_seed = (p * n_rigs + r) as u64;
            let out = run_episode(
                policy.as_mut(),
                rig,
                cfg,
                &Calibrator::Skip,
                episode_seed,
                &mut rng,
            );

            if let Some(dir) = records_dir {
                let episode_dir = dir.join(policy.name()).join(format!("rig_{r:02}"));
                vical_sim::write_episode(&episode_dir, &out.record)
                    .with_context(|| format!("write record {}", episode_dir.display()))?;
            }

            let t0 = std::time::Instant::now();
            let solved: Result<Vec<f64>, String> = match task {
                Task::Joint => solve_record(&out.record, &cfg.solver)
                    .map(|sol| {
                        let mut v = sol.intrinsic_vector.to_vec();
                        v.extend_from_slice(&sol.extrinsic_vector);
                        v
                    })
                    .map_err(|e| e.to_string()),
                Task::Intrinsic => {
                    let detections: Vec<_> =
                        out.record.frames.iter().map(|(_, d)| d.clone()).collect();
                    calibrate_intrinsics(
                        &detections,
                        &rig.board,
                        rig.intrinsics.width,
                        rig.intrinsics.height,
                        &cfg.solver.calib,
                    )
                    .map(|res| {
                        let k = &res.intrinsics;
                        vec![
                            k.fx, k.fy, k.cx, k.cy, k.dist.k1, k.dist.k2, k.dist.p1, k.dist.p2,
                        ]
                    })
                    .map_err(|e| e.to_string())
                }
                Task::ExtrinsicKnownK => {
                    solve_extrinsic_from_record(&out.record, &rig.intrinsics)
                        .map(|pose| {
                            let (roll, pitch, yaw) = pose.rpy();
                            let t = pose.position;
                            vec![t.x, t.y, t.z, roll, pitch, yaw]
                        })
                        .map_err(|e| e.to_string())
                }
            };
            let solve_s = t0.elapsed().as_secs_f64();

            let truth: Vec<f64> = match task {
                Task::Joint => truth_vector(rig),
                Task::Intrinsic => rig.intrinsic_vector().to_vec(),
                Task::ExtrinsicKnownK => rig.extrinsic_vector().to_vec(),
            };
            let (error_pct, note) = match solved {
                Ok(est) => match percent_error(&truth, &est) {
                    Ok(e) => (Some(e), String::new()),
                    Err(e) => (None, e.to_string()),
                },
                Err(e) => (None, e),
            };

            rows.push(EvalRow {
                policy: policy.name().to_string(),
                task: task.label().to_string(),
                rig: r,
                error_pct,
                path_m: out.path_length,
                solve_s,
                steps: out.steps(),
                terminal: out.terminal,
                note,
            });
        }
    }

    let summaries = summarize(&rows);
    Ok(EvalReport {
        task,
        seed,
        n_rigs,
        rows,
        summaries,
    })
}
