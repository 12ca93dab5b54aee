//! Experiment harness for the visual-inertial calibration environment:
//! episode driving, SAC training, baseline policies, evaluation, and the
//! `vical` command-line interface.
//!
//! The crates underneath provide the pieces — `vical-sim` renders board and
//! IMU data for a motion segment, `vical-mdp` folds observations into the
//! coverage state and rewards, `vical-solver` recovers the calibration, and
//! `vical-rl` learns the motion policy. This crate wires them into episodes
//! ([`run_episode`]), a training loop ([`train`]), and the evaluation
//! protocol ([`evaluate`]).

mod calibrate;
mod config;
mod episode;
mod eval;
mod plot;
mod policy;
mod replay;
mod train;

pub use calibrate::{truth_vector, CalibOutcome, Calibrator};
pub use config::{
    dump_config, echo_config, load_config, parse_config, CalibratorKind, ConfigError,
    EpisodeConfig, EvalConfig, HarnessConfig, TrainConfig,
};
pub use episode::{clamp_action_to_box, run_episode, EpisodeOutcome, EpisodeSim, WorkspaceBox};
pub use eval::{
    evaluate, standard_policies, summarize, EvalError, EvalReport, EvalRow, PolicySummary, Task,
};
pub use plot::{eval_scatter_svg, training_curve_svg};
pub use policy::{
    LearnedPolicy, Policy, RandomPolicy, ScriptError, ScriptPolicy, SCRIPT_LONG, SCRIPT_SHORT,
};
pub use replay::{diagnose_record, render_diag, ReplayDiag, StepDiag};
pub use train::{read_training_log, train, EpisodeLog, TrainOutcome};
