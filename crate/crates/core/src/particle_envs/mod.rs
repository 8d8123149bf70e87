//! Deterministic 2D particle worlds: cooperative navigation, cooperative
//! communication (speaker/listener), keep-away and physical deception.

pub mod trajectory;
mod world;

pub use trajectory::{StepRecord, Trajectory};
pub use world::{
    make_scenario, Color, Entity, PhysicsParams, Role, Scenario, StepOutcome, World,
    ADVERSARY_RADIUS, DEFAULT_MAX_STEPS, GOOD_RADIUS, LANDMARK_RADIUS, MESSAGE_DIM,
};
