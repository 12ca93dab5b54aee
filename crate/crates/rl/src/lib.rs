//! From-scratch soft actor-critic.
//!
//! Everything an SAC learner needs, with no autodiff or tensor framework
//! behind it: dense multilayer perceptrons with hand-written exact
//! backpropagation ([`Mlp`]), adaptive-moment parameter updates ([`Adam`]),
//! a uniform ring replay buffer ([`ReplayBuffer`]), the tanh-squashed
//! Gaussian policy with twin Q networks and a Polyak-tracked value target
//! ([`SacAgent`]), the affine map between `[-1, 1]^6` network actions and
//! feasible camera motions ([`action_to_env`]), and a versioned binary
//! checkpoint that restores training bit-exactly ([`save_checkpoint`]).
//!
//! All arithmetic is `f64` and single-threaded; given equal seeds, training
//! trajectories are bitwise reproducible.

mod action_map;
mod adam;
mod agent;
mod checkpoint;
mod mlp;
mod replay;

pub use action_map::{action_to_env, env_from_action};
pub use adam::Adam;
pub use agent::{polyak_update, SacAgent, SacConfig, SacGrads, UpdateDiag};
pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointError, TrainCounters};
pub use mlp::{Mlp, MlpCache};
pub use replay::{ReplayBuffer, RlError, Transition};
