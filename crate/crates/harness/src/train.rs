//! The soft actor-critic training loop.
//!
//! A single master RNG (seeded from the configuration) drives every random
//! choice — rig sampling, exploration, sensor noise, minibatch draws — so a
//! run is fully determined by its configuration, and a checkpoint restores
//! it bit-exactly.
//!
//! Per episode: sample a fresh rig, roll the policy (uniform-random during
//! warm-up), push each transition into the replay buffer, and after warm-up
//! run the configured number of gradient updates per environment step.
//! Episodes always run to completion; the step budget and the checkpoint
//! cadence are checked at episode boundaries, which keeps every checkpoint
//! resumable without any mid-episode environment state.
//!
//! Outputs in the run directory: `config_used.toml`, `training_log.csv`
//! (one row per episode), `checkpoint_latest.ckpt` (periodic), and
//! `checkpoint_final.ckpt`.

use crate::{echo_config, Calibrator, CalibratorKind, EpisodeSim, HarnessConfig};
use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use vical_rl::{load_checkpoint, save_checkpoint, ReplayBuffer, SacAgent, TrainCounters};
use vical_sim::sample_rig;

/// One `training_log.csv` row: the outcome of a single training episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    /// Zero-based episode index.
    pub episode: u64,
    /// Total environment steps taken after this episode.
    pub env_steps: u64,
    /// Steps in this episode.
    pub steps: usize,
    pub episode_return: f64,
    pub terminal: bool,
    /// Terminal fraction over the trailing 50 episodes (including this one).
    /// The window restarts when a run is resumed from a checkpoint.
    pub terminal_rate_50: f64,
}

/// What a training run produced.
#[derive(Debug)]
pub struct TrainOutcome {
    pub counters: TrainCounters,
    /// Episode log rows appended by this run (excludes pre-resume history).
    pub log: Vec<EpisodeLog>,
    pub checkpoint_latest: PathBuf,
    pub checkpoint_final: PathBuf,
    pub log_path: PathBuf,
}

impl TrainOutcome {
    /// Terminal fraction over the trailing 50 episodes of this run.
    pub fn last50_terminal_rate(&self) -> f64 {
        self.log.last().map_or(0.0, |row| row.terminal_rate_50)
    }
}

/// Runs (or resumes) training until the configured number of environment
/// steps is reached, writing artifacts into `out_dir`.
pub fn train(cfg: &HarnessConfig, out_dir: &Path, resume: Option<&Path>) -> Result<TrainOutcome> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("create output directory {}", out_dir.display()))?;
    echo_config(cfg, out_dir).context("write config_used.toml")?;

    let (mut agent, mut replay, mut rng, mut counters) = match resume {
        Some(path) => load_checkpoint(path)
            .with_context(|| format!("resume from checkpoint {}", path.display()))?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let agent = SacAgent::new(cfg.agent.clone(), &mut rng);
            let replay = ReplayBuffer::new(cfg.train.replay_capacity);
            (agent, replay, rng, TrainCounters::default())
        }
    };

    let calibrator = match cfg.train.calibrator {
        CalibratorKind::Real => Calibrator::Real(cfg.solver.clone()),
        CalibratorKind::Stubbed => Calibrator::Stubbed {
            noise_pct: cfg.train.stub_noise_pct,
        },
    };

    let log_path = out_dir.join("training_log.csv");
    let append = resume.is_some() && log_path.exists();
    let log_file = std::fs::OpenOptions::new()
        .create(true)
        .append(append)
        .write(true)
        .truncate(!append)
        .open(&log_path)
        .with_context(|| format!("open {}", log_path.display()))?;
    let mut log_writer = csv::WriterBuilder::new()
        .has_headers(!append)
        .from_writer(log_file);

    let checkpoint_latest = out_dir.join("checkpoint_latest.ckpt");
    let checkpoint_final = out_dir.join("checkpoint_final.ckpt");
    let mut last_checkpoint_steps = counters.env_steps;

    let total_steps = cfg.train.total_steps as u64;
    let warmup_steps = cfg.train.warmup_steps as u64;
    let mut log = Vec::new();
    let mut terminal_window: VecDeque<bool> = VecDeque::with_capacity(50);

    while counters.env_steps < total_steps {
        let rig = sample_rig(&mut rng, &cfg.rig);
        let mut sim = EpisodeSim::new(cfg, &rig, &calibrator, counters.episodes);
        while !sim.done() {
            let raw = if counters.env_steps < warmup_steps {
                let mut a = [0.0; 6];
                for v in &mut a {
                    *v = rng.gen_range(-1.0..=1.0);
                }
                a
            } else {
                let (v, _) = agent.sample_action(sim.state(), &mut rng);
                let mut a = [0.0; 6];
                a.copy_from_slice(&v);
                a
            };
            let transition = sim.step(raw, &mut rng).clone();
            replay.push(transition);
            counters.env_steps += 1;
            if counters.env_steps > warmup_steps {
                for _ in 0..cfg.train.updates_per_step {
                    if replay.len() >= cfg.agent.batch_size {
                        agent.update(&replay, &mut rng).context("gradient update")?;
                        counters.updates += 1;
                    }
                }
            }
        }
        let outcome = sim.finish();
        let episode = counters.episodes;
        counters.episodes += 1;

        if terminal_window.len() == 50 {
            terminal_window.pop_front();
        }
        terminal_window.push_back(outcome.terminal);
        let rate = terminal_window.iter().filter(|t| **t).count() as f64
            / terminal_window.len() as f64;
        let row = EpisodeLog {
            episode,
            env_steps: counters.env_steps,
            steps: outcome.steps(),
            episode_return: outcome.episode_return,
            terminal: outcome.terminal,
            terminal_rate_50: rate,
        };
        log_writer.serialize(&row).context("write log row")?;
        log_writer.flush()?;
        log.push(row);

        if counters.env_steps - last_checkpoint_steps >= cfg.train.checkpoint_every as u64 {
            save_checkpoint(&checkpoint_latest, &agent, &replay, &rng, &counters)
                .context("write periodic checkpoint")?;
            last_checkpoint_steps = counters.env_steps;
        }
    }

    save_checkpoint(&checkpoint_final, &agent, &replay, &rng, &counters)
        .context("write final checkpoint")?;
    save_checkpoint(&checkpoint_latest, &agent, &replay, &rng, &counters)
        .context("write latest checkpoint")?;

    Ok(TrainOutcome {
        counters,
        log,
        checkpoint_latest,
        checkpoint_final,
        log_path,
    })
}

/// Reads a `training_log.csv` written by [`train`].
pub fn read_training_log(path: &Path) -> Result<Vec<EpisodeLog>> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("open {}", path.display()))?;
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        rows.push(row.context("parse log row")?);
    }
    Ok(rows)
}
