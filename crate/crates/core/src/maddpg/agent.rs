use crate::gaussian_stats::{ActionWindow, MarginalEstimate};
use crate::numerics::{soft_update, Activation, DenseNet, OptimizerState, Rng};
use crate::particle_envs::Role;
use crate::Result;

use super::config::{TrainConfig, Variant};

/// One learner: an ensemble of actors, a centralized critic, their target
/// copies, and the running statistics behind its MI estimate.
#[derive(Clone, Debug)]
pub struct Agent {
    pub role: Role,
    pub variant: Variant,
    pub actors: Vec<DenseNet>,
    pub target_actors: Vec<DenseNet>,
    pub actor_optimizers: Vec<OptimizerState>,
    pub critic: DenseNet,
    pub target_critic: DenseNet,
    pub critic_optimizer: OptimizerState,
    pub marginal: MarginalEstimate,
    pub window: ActionWindow,
    /// Ensemble member acting (and learning) this episode.
    pub active: usize,
    /// Total actions pushed into the window.
    pub window_pushes: u64,
}

impl Agent {
    /// Actors map `obs_dim -> act_dim` through two relu hidden layers and a
    /// tanh output; the critic maps the joint observation and action to a
    /// linear scalar. Targets start as exact copies.
    pub fn new(
        role: Role,
        variant: Variant,
        obs_dim: usize,
        act_dim: usize,
        critic_in_dim: usize,
        cfg: &TrainConfig,
        init_rng: &mut Rng,
    ) -> Result<Self> {
        let h = cfg.hidden;
        let actors = (0..cfg.ensemble_k)
            .map(|_| {
                DenseNet::mlp(
                    &[obs_dim, h, h, act_dim],
                    Activation::Relu,
                    Activation::Tanh,
                    init_rng,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let critic = DenseNet::mlp(
            &[critic_in_dim, h, h, 1],
            Activation::Relu,
            Activation::Identity,
            init_rng,
        )?;
        let actor_optimizers = actors
            .iter()
            .map(|a| OptimizerState::new(a, cfg.optimizer))
            .collect();
        Ok(Self {
            role,
            variant,
            target_actors: actors.clone(),
            actor_optimizers,
            critic_optimizer: OptimizerState::new(&critic, cfg.optimizer),
            target_critic: critic.clone(),
            critic,
            actors,
            marginal: MarginalEstimate::new(cfg.alpha)?,
            window: ActionWindow::new(cfg.window),
            active: 0,
            window_pushes: 0,
        })
    }

    pub fn actor(&self) -> &DenseNet {
        &self.actors[self.active]
    }

    pub fn target_actor(&self) -> &DenseNet {
        &self.target_actors[self.active]
    }

    pub fn ensemble_size(&self) -> usize {
        self.actors.len()
    }

    /// Deterministic policy output plus Gaussian exploration noise, clipped to `[-1, 1]`.
    pub fn select_action(&self, obs: &[f64], noise_scale: f64, rng: &mut Rng) -> Result<Vec<f64>> {
        let mean = self.actor().predict(obs)?;
        let noise = rng.gaussian_noise(mean.len(), noise_scale);
        Ok(mean
            .iter()
            .zip(&noise)
            .map(|(m, n)| (m + n).clamp(-1.0, 1.0))
            .collect())
    }

    /// Picks this episode's ensemble member uniformly and makes it active.
    pub fn draw_ensemble_member(&mut self, rng: &mut Rng) -> usize {
        self.active = if self.actors.len() == 1 {
            0
        } else {
            rng.index(self.actors.len())
        };
        self.active
    }

    /// Pushes an executed action into the window and folds the window's
    /// moments into the running marginal.
    pub fn record_action(&mut self, action: &[f64]) -> Result<()> {
        self.window.push(action);
        self.window_pushes += 1;
        if let Some(snapshot) = self.window.snapshot_moments() {
            self.marginal.update_from(&snapshot)?;
        }
        Ok(())
    }

    /// Soft-updates the critic target and the active actor's target.
    pub fn update_targets(&mut self, tau: f64) -> Result<()> {
        soft_update(&mut self.target_critic, &self.critic, tau)?;
        let k = self.active;
        soft_update(&mut self.target_actors[k], &self.actors[k], tau)
    }
}

/// Free-function form of [`Agent::select_action`].
pub fn select_action(
    agent: &Agent,
    obs: &[f64],
    noise_scale: f64,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    agent.select_action(obs, noise_scale, rng)
}

/// Free-function form of [`Agent::draw_ensemble_member`].
pub fn draw_ensemble_member(agent: &mut Agent, rng: &mut Rng) -> usize {
    agent.draw_ensemble_member(rng)
}
