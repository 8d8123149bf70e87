//! Dense networks, optimizer and random streams used by the actors and critics.

pub mod gradcheck;
mod net;
mod optim;
mod rng;

pub use net::{soft_update, Activation, DenseNet, Layer};
pub use optim::{AdamConfig, OptimizerState};
pub use rng::{gaussian_noise, Rng, RngState};
