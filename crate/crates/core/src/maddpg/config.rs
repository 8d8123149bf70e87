use std::fmt;

use crate::gaussian_stats::{DEFAULT_ALPHA, DEFAULT_WINDOW};
use crate::numerics::AdamConfig;
use crate::particle_envs::DEFAULT_MAX_STEPS;
use crate::{Error, Result};

/// How an agent builds its critic target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Variant {
    /// `y = r + gamma Q'(x', a')`
    Baseline,
    /// `y = (r - beta I) + gamma Q'(x', a')`, with `I` the policy
    /// mutual-information estimate for the minibatch.
    CapacityLimited { beta: f64 },
}

impl Variant {
    pub fn beta(self) -> f64 {
        match self {
            Variant::Baseline => 0.0,
            Variant::CapacityLimited { beta } => beta,
        }
    }

    /// Legend label: `MADDPG` or `CL-MA <beta>`.
    pub fn label(self) -> String {
        match self {
            Variant::Baseline => "MADDPG".to_string(),
            Variant::CapacityLimited { beta } => format!("CL-MA {beta:e}"),
        }
    }

    /// Parses `baseline` or `cl:<beta>`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "baseline" {
            return Ok(Variant::Baseline);
        }
        let beta = s
            .strip_prefix("cl:")
            .and_then(|b| b.parse::<f64>().ok())
            .ok_or_else(|| {
                Error::Config(format!(
                    "variant '{s}' is neither 'baseline' nor 'cl:<beta>'"
                ))
            })?;
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::Config(format!(
                "beta must be a finite value >= 0, got {beta}"
            )));
        }
        Ok(Variant::CapacityLimited { beta })
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Baseline => f.write_str("baseline"),
            Variant::CapacityLimited { beta } => write!(f, "cl:{beta:e}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub gamma: f64,
    pub tau: f64,
    /// Minibatch size `S`.
    pub batch_size: usize,
    /// Actors per agent; one is drawn at the start of every episode.
    pub ensemble_k: usize,
    pub buffer_capacity: usize,
    pub noise_start: f64,
    pub noise_end: f64,
    /// Fraction of `episodes` over which the noise decays linearly.
    pub noise_decay_fraction: f64,
    pub episodes: usize,
    pub max_episode_length: usize,
    /// Environment steps between update rounds.
    pub update_every: usize,
    /// Transitions required before the first update; `None` means `4 * batch_size`.
    pub warmup: Option<usize>,
    /// Update rate of the running marginal.
    pub alpha: f64,
    pub window: usize,
    pub hidden: usize,
    pub optimizer: AdamConfig,
    /// Maintain action windows and compute the MI estimate. Only
    /// capacity-limited agents need it for training; it is also logged.
    pub track_mi: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            gamma: 0.95,
            tau: 0.01,
            batch_size: 256,
            ensemble_k: 1,
            buffer_capacity: 1_000_000,
            noise_start: 0.3,
            noise_end: 0.05,
            noise_decay_fraction: 0.5,
            episodes: 2000,
            max_episode_length: DEFAULT_MAX_STEPS,
            update_every: 1,
            warmup: None,
            alpha: DEFAULT_ALPHA,
            window: DEFAULT_WINDOW,
            hidden: 64,
            optimizer: AdamConfig::default(),
            track_mi: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(0.0..1.0).contains(&self.gamma) {
            return fail(format!("gamma must lie in [0, 1), got {}", self.gamma));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return fail(format!("tau must lie in (0, 1], got {}", self.tau));
        }
        if self.batch_size < 2 {
            return fail(format!(
                "batch size must be at least 2, got {}",
                self.batch_size
            ));
        }
        if self.ensemble_k == 0 {
            return fail("ensemble size must be at least 1".into());
        }
        if self.buffer_capacity < self.batch_size {
            return fail("replay capacity must hold at least one minibatch".into());
        }
        if self.max_episode_length == 0
            || self.update_every == 0
            || self.window == 0
            || self.hidden == 0
        {
            return fail(
                "episode length, update interval, window and hidden width must be positive".into(),
            );
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return fail(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if self.noise_start < 0.0
            || self.noise_end < 0.0
            || !(0.0..=1.0).contains(&self.noise_decay_fraction)
        {
            return fail("noise scales must be >= 0 and the decay fraction in [0, 1]".into());
        }
        if self.optimizer.learning_rate.is_nan() || self.optimizer.learning_rate <= 0.0 {
            return fail("learning rate must be positive".into());
        }
        Ok(())
    }

    pub fn warmup_transitions(&self) -> usize {
        self.warmup.unwrap_or(4 * self.batch_size)
    }

    /// Exploration noise for a 0-based episode index: linear from
    /// `noise_start` to `noise_end` over the decay span, flat afterwards.
    pub fn noise_scale(&self, episode: usize) -> f64 {
        let span = self.noise_decay_fraction * self.episodes as f64;
        let progress = if span <= 0.0 {
            1.0
        } else {
            episode as f64 / span
        };
        if progress >= 1.0 {
            return self.noise_end;
        }
        self.noise_start + (self.noise_end - self.noise_start) * progress
    }
}
