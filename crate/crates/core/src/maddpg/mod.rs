//! MADDPG with centralized critics and an optional policy mutual-information
//! penalty in the critic target.

mod agent;
pub mod checkpoint;
mod config;
mod replay;
mod train;
pub mod update;

pub use agent::{draw_ensemble_member, select_action, Agent};
pub use config::{TrainConfig, Variant};
pub use replay::{Layout, Minibatch, ReplayBuffer, Transition};
pub use train::{run_training, EpisodeLog, Trainer, UpdateStats};
pub use update::{actor_update, critic_target, critic_update};
