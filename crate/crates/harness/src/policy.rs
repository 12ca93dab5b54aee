//! Motion policies: the learned agent, a uniform-random baseline, and
//! scripted sweeps loaded from CSV.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;
use vical_geom::{Action, ActionBounds};
use vical_mdp::{StateVector, STATE_DIM};
use vical_rl::{env_from_action, SacAgent};

/// Scripted sweep tuned to pan all four image regions, change depth, and
/// tilt about both axes. Columns: `rho,theta,phi,alpha,beta,gamma`.
pub const SCRIPT_SHORT: &str = include_str!("../assets/handcrafted_short.csv");
/// Longer variant of [`SCRIPT_SHORT`] with wider amplitude; reaches the
/// default terminal thresholds before the step budget.
pub const SCRIPT_LONG: &str = include_str!("../assets/handcrafted_long.csv");

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("script line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("script has no motion rows")]
    Empty,
}

/// A source of raw actions in `[-1, 1]^6`, one per environment step.
pub trait Policy {
    fn name(&self) -> &str;
    /// Called once at the start of each episode.
    fn begin_episode(&mut self) {}
    fn act(&mut self, state: &StateVector, rng: &mut ChaCha8Rng) -> [f64; 6];
}

/// Uniform samples over the raw action box.
pub struct RandomPolicy;

impl Policy for RandomPolicy {
    fn name(&self) -> &str {
        "random"
    }

    fn act(&mut self, _state: &StateVector, rng: &mut ChaCha8Rng) -> [f64; 6] {
        let mut a = [0.0; 6];
        for v in &mut a {
            *v = rng.gen_range(-1.0..=1.0);
        }
        a
    }
}

/// The trained SAC policy.
pub struct LearnedPolicy {
    pub agent: SacAgent,
    /// Use the mean action (evaluation) instead of sampling (training).
    pub deterministic: bool,
}

impl Policy for LearnedPolicy {
    fn name(&self) -> &str {
        "learned"
    }

    fn act(&mut self, state: &StateVector, rng: &mut ChaCha8Rng) -> [f64; 6] {
        assert_eq!(state.len(), STATE_DIM);
        let v = if self.deterministic {
            self.agent.mean_action(state)
        } else {
            self.agent.sample_action(state, rng).0
        };
        let mut a = [0.0; 6];
        a.copy_from_slice(&v);
        a
    }
}

/// Replays a fixed list of motion rows; once exhausted it holds still.
#[derive(Debug, Clone)]
pub struct ScriptPolicy {
    name: String,
    rows: Vec<Action>,
    bounds: ActionBounds,
    cursor: usize,
}

impl ScriptPolicy {
    /// Parses CSV text with columns `rho,theta,phi,alpha,beta,gamma` (one
    /// motion per row; `#` starts a comment).
    pub fn from_csv(name: &str, text: &str, bounds: &ActionBounds) -> Result<Self, ScriptError> {
        let mut rows = Vec::new();
        let mut header_allowed = true;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            // The first payload line may be a column header.
            if header_allowed {
                header_allowed = false;
                if line.starts_with("rho") {
                    continue;
                }
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| ScriptError::Malformed {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            if fields.len() != 6 {
                return Err(ScriptError::Malformed {
                    line: i + 1,
                    message: format!("expected 6 fields, found {}", fields.len()),
                });
            }
            rows.push(Action::new(
                fields[0], fields[1], fields[2], fields[3], fields[4], fields[5], bounds,
            ));
        }
        if rows.is_empty() {
            return Err(ScriptError::Empty);
        }
        Ok(Self {
            name: name.to_string(),
            rows,
            bounds: *bounds,
            cursor: 0,
        })
    }

    pub fn short(bounds: &ActionBounds) -> Self {
        Self::from_csv("handcrafted_short", SCRIPT_SHORT, bounds).expect("embedded script parses")
    }

    pub fn long(bounds: &ActionBounds) -> Self {
        Self::from_csv("handcrafted_long", SCRIPT_LONG, bounds).expect("embedded script parses")
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

impl Policy for ScriptPolicy {
    fn name(&self) -> &str {
        &self.name
    }

    fn begin_episode(&mut self) {
        self.cursor = 0;
    }

    fn act(&mut self, _state: &StateVector, _rng: &mut ChaCha8Rng) -> [f64; 6] {
        let action = if self.cursor < self.rows.len() {
            self.rows[self.cursor]
        } else {
            Action::null()
        };
        self.cursor += 1;
        env_from_action(&action, &self.bounds)
    }
}
