//! Multi-agent deep deterministic policy gradients (MADDPG) with an optional
//! capacity limit on each agent's policy, trained on small 2D particle worlds.
//!
//! The crate is split along the pipeline:
//!
//! - [`numerics`]: dense networks with exact backpropagation, Adam, seeded RNG.
//! - [`gaussian_stats`]: diagonal Gaussians and the policy mutual-information
//!   estimator (action window, running marginal, plug-in entropies).
//! - [`particle_envs`]: the four particle scenarios.
//! - [`maddpg`]: agents, replay, critic/actor updates and the training loop.
//! - [`harness`]: multi-seed experiments, CSV output, aggregation and the CLI.

pub mod error;
pub mod gaussian_stats;
pub mod harness;
pub mod maddpg;
pub mod numerics;
pub mod particle_envs;

pub use error::{Error, Result};
