//! Run configuration: one strict TOML file covering every stage.
//!
//! Unknown keys are rejected with the offending key named, every field has a
//! documented default, and the effective configuration is echoed into each
//! output directory as `config_used.toml` so results stay auditable.

use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;
use vical_geom::ActionBounds;
use vical_mdp::{RewardCoeffs, TerminalThresholds};
use vical_rl::SacConfig;
use vical_sim::{RigSampleOptions, SimConfig};
use vical_solver::RecordSolveOptions;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: String,
        source: Box<toml::de::Error>,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Episode shape: step budget and the reachable workspace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpisodeConfig {
    /// Hard cap on motion steps per episode.
    pub max_steps: usize,
    /// Axis-aligned workspace extents `[x, y, z]` in metres, centered on the
    /// episode's initial position. Translations are clamped to this box
    /// along their ray.
    pub workspace: [f64; 3],
    /// Initial camera position in world coordinates; the initial orientation
    /// always faces the board center.
    pub start_position: [f64; 3],
    /// Per-step motion bounds.
    pub bounds: ActionBounds,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            max_steps: 20,
            workspace: [1.0, 1.0, 0.8],
            start_position: [0.0, 0.0, 0.0],
            bounds: ActionBounds::default(),
        }
    }
}

/// Which calibrator scores terminal episodes during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibratorKind {
    /// Full offline solve of the recorded episode.
    Real,
    /// Ground truth perturbed by Gaussian relative noise — fast stand-in for
    /// smoke tests of the training plumbing.
    Stubbed,
}

/// Training-loop knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    /// Environment steps to run in total.
    pub total_steps: usize,
    /// Uniform-random exploration steps before learning starts.
    pub warmup_steps: usize,
    /// Gradient updates per environment step after warm-up.
    pub updates_per_step: usize,
    /// Replay buffer capacity.
    pub replay_capacity: usize,
    /// Environment steps between checkpoint writes.
    pub checkpoint_every: usize,
    pub calibrator: CalibratorKind,
    /// Relative noise (percent) of the stubbed calibrator.
    pub stub_noise_pct: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            total_steps: 15_000,
            warmup_steps: 500,
            updates_per_step: 1,
            replay_capacity: 100_000,
            checkpoint_every: 1_000,
            calibrator: CalibratorKind::Real,
            stub_noise_pct: 1.0,
        }
    }
}

/// Evaluation-protocol knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Rigs sampled per evaluation.
    pub n_rigs: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { n_rigs: 20 }
    }
}

/// Complete configuration of a run. Every section falls back to its default
/// when omitted, so an empty file is a valid configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct HarnessConfig {
    /// Master seed; all randomness in a subcommand derives from it.
    pub seed: u64,
    pub episode: EpisodeConfig,
    pub sim: SimConfig,
    pub rig: RigSampleOptions,
    pub thresholds: TerminalThresholds,
    pub reward: RewardCoeffs,
    pub agent: SacConfig,
    pub train: TrainConfig,
    pub eval: EvalConfig,
    pub solver: RecordSolveOptions,
}

impl HarnessConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        if self.episode.max_steps == 0 {
            return Err(ConfigError::Invalid("episode.max_steps must be at least 1".into()));
        }
        if self.episode.workspace.iter().any(|w| *w <= 0.0) {
            return Err(ConfigError::Invalid("episode.workspace extents must be positive".into()));
        }
        if self.agent.state_dim != vical_mdp::STATE_DIM || self.agent.action_dim != 6 {
            return Err(ConfigError::Invalid(format!(
                "agent must map {}-dim states to 6-dim actions",
                vical_mdp::STATE_DIM
            )));
        }
        Ok(())
    }
}

/// Loads a configuration file; `None` yields all defaults.
pub fn load_config(path: Option<&Path>) -> Result<HarnessConfig, ConfigError> {
    let cfg = match path {
        None => HarnessConfig::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Io {
                path: p.display().to_string(),
                source,
            })?;
            parse_config(&text).map_err(|source| ConfigError::Parse {
                path: p.display().to_string(),
                source: Box::new(source),
            })?
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Parses configuration text (strict: unknown keys are errors).
pub fn parse_config(text: &str) -> Result<HarnessConfig, toml::de::Error> {
    toml::from_str(text)
}

/// Serializes the effective configuration for echoing into output artifacts.
pub fn dump_config(cfg: &HarnessConfig) -> String {
    toml::to_string_pretty(cfg).expect("config serializes")
}

/// Writes `config_used.toml` into `out_dir`.
pub fn echo_config(cfg: &HarnessConfig, out_dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("config_used.toml"), dump_config(cfg))
}
