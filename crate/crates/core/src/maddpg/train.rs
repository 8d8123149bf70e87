//! The episode loop: act, step, store, update the marginal, then one
//! critic/actor update per agent and a soft target update.

use std::time::Instant;

use crate::gaussian_stats::policy_mutual_information;
use crate::numerics::Rng;
use crate::particle_envs::{Scenario, StepRecord, Trajectory, World};
use crate::{Error, Result};

use super::agent::Agent;
use super::config::{TrainConfig, Variant};
use super::replay::{Layout, ReplayBuffer, Transition};
use super::update::{actor_update, critic_target, critic_update};

const STREAM_INIT: u64 = 1;
const STREAM_ENV: u64 = 2;
const STREAM_SAMPLE: u64 = 3;
const STREAM_NOISE: u64 = 100;
const STREAM_ENSEMBLE: u64 = 200;

/// Summary of one episode.
#[derive(Clone, Debug)]
pub struct EpisodeLog {
    /// 1-based.
    pub episode: usize,
    /// Raw environment reward summed over the episode, per agent.
    pub rewards: Vec<f64>,
    /// Mean MI estimate over the episode's update rounds, per agent (0 if none).
    pub mean_mi: Vec<f64>,
    pub wall_ms: f64,
}

impl PartialEq for EpisodeLog {
    /// Wall-clock time is ignored.
    fn eq(&self, other: &Self) -> bool {
        self.episode == other.episode
            && self.rewards == other.rewards
            && self.mean_mi == other.mean_mi
    }
}

/// Scalar diagnostics from one update round.
#[derive(Clone, Debug, Default)]
pub struct UpdateStats {
    pub mi: Vec<f64>,
    pub critic_loss: Vec<f64>,
    pub actor_grad_norm: Vec<f64>,
}

fn with_context(err: Error, context: impl FnOnce() -> String) -> Error {
    match err {
        Error::NonFinite(msg) => Error::NonFinite(format!("{}: {msg}", context())),
        other => other,
    }
}

/// Owns everything a single seeded training run mutates.
#[derive(Clone, Debug)]
pub struct Trainer {
    pub(crate) cfg: TrainConfig,
    pub(crate) scenario: Scenario,
    pub(crate) layout: Layout,
    pub(crate) agents: Vec<Agent>,
    pub(crate) buffer: ReplayBuffer,
    pub(crate) env_rng: Rng,
    pub(crate) sample_rng: Rng,
    pub(crate) noise_rngs: Vec<Rng>,
    pub(crate) ensemble_rngs: Vec<Rng>,
    pub(crate) episode: usize,
    pub(crate) env_steps: u64,
    pub(crate) update_rounds: u64,
}

impl Trainer {
    /// `variants[i]` selects agent `i`'s critic target.
    pub fn new(
        cfg: TrainConfig,
        scenario: Scenario,
        variants: &[Variant],
        seed: u64,
    ) -> Result<Self> {
        cfg.validate()?;
        let root = Rng::new(seed);
        let probe = World::new(scenario, &mut root.substream(0));
        if variants.len() != probe.num_agents() {
            return Err(Error::Config(format!(
                "{scenario} has {} agents but {} variants were given",
                probe.num_agents(),
                variants.len()
            )));
        }
        let layout = Layout::new(probe.obs_dims(), probe.action_dims());
        let mut init_rng = root.substream(STREAM_INIT);
        let agents = variants
            .iter()
            .enumerate()
            .map(|(i, &variant)| {
                Agent::new(
                    probe.roles[i],
                    variant,
                    layout.obs_dims[i],
                    layout.act_dims[i],
                    layout.critic_in_dim(),
                    &cfg,
                    &mut init_rng,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let n = agents.len() as u64;
        Ok(Self {
            buffer: ReplayBuffer::new(cfg.buffer_capacity),
            env_rng: root.substream(STREAM_ENV),
            sample_rng: root.substream(STREAM_SAMPLE),
            noise_rngs: (0..n).map(|i| root.substream(STREAM_NOISE + i)).collect(),
            ensemble_rngs: (0..n)
                .map(|i| root.substream(STREAM_ENSEMBLE + i))
                .collect(),
            cfg,
            scenario,
            layout,
            agents,
            episode: 0,
            env_steps: 0,
            update_rounds: 0,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn agents_mut(&mut self) -> &mut [Agent] {
        &mut self.agents
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn episodes_done(&self) -> usize {
        self.episode
    }

    pub fn env_steps(&self) -> u64 {
        self.env_steps
    }

    pub fn update_rounds(&self) -> u64 {
        self.update_rounds
    }

    /// Every network parameter of every agent, in a fixed order.
    pub fn parameter_snapshot(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for a in &self.agents {
            for net in a.actors.iter().chain(&a.target_actors) {
                out.extend(net.parameters());
            }
            out.extend(a.critic.parameters());
            out.extend(a.target_critic.parameters());
        }
        out
    }

    fn update_due(&self) -> bool {
        self.buffer.len() >= self.cfg.warmup_transitions()
            && self.buffer.len() >= self.cfg.batch_size
            && self.env_steps.is_multiple_of(self.cfg.update_every as u64)
    }

    /// One update round: for each agent sample a minibatch, estimate MI on
    /// that agent's action columns, build the critic target, then step the
    /// critic and the actor. Targets are soft-updated after all agents.
    pub fn update_round(&mut self) -> Result<UpdateStats> {
        let mut stats = UpdateStats::default();
        for i in 0..self.agents.len() {
            let batch = self
                .buffer
                .sample(self.cfg.batch_size, &mut self.sample_rng)?;
            let mi = match (self.cfg.track_mi, self.agents[i].marginal.gaussian()) {
                (true, Some(marginal)) => {
                    policy_mutual_information(marginal, batch.agent_actions(&self.layout, i))?
                }
                _ => 0.0,
            };
            if !mi.is_finite() {
                return Err(Error::NonFinite(format!("agent {i}: MI estimate {mi}")));
            }
            let y = critic_target(&batch, &self.agents, &self.layout, i, mi, self.cfg.gamma)?;
            let agent = &mut self.agents[i];
            let loss = critic_update(agent, &batch, y.view())
                .map_err(|e| with_context(e, || format!("agent {i} critic")))?;
            let norm = actor_update(agent, &batch, &self.layout, i)
                .map_err(|e| with_context(e, || format!("agent {i} actor")))?;
            stats.mi.push(mi);
            stats.critic_loss.push(loss);
            stats.actor_grad_norm.push(norm);
        }
        for agent in &mut self.agents {
            agent.update_targets(self.cfg.tau)?;
        }
        self.update_rounds += 1;
        Ok(stats)
    }

    /// Runs one episode, optionally recording a per-step trace.
    pub fn run_episode(&mut self, mut trace: Option<&mut Trajectory>) -> Result<EpisodeLog> {
        let started = Instant::now();
        let episode = self.episode;
        for (agent, rng) in self.agents.iter_mut().zip(&mut self.ensemble_rngs) {
            agent.draw_ensemble_member(rng);
        }
        let mut world = World::new(self.scenario, &mut self.env_rng)
            .with_max_steps(self.cfg.max_episode_length);
        let noise = self.cfg.noise_scale(episode);
        let n = self.agents.len();
        let mut obs = world.observe_all();
        let mut reward_sums = vec![0.0; n];
        let mut mi_sums = vec![0.0; n];
        let mut rounds = 0usize;

        while !world.is_done() {
            let actions = self
                .agents
                .iter()
                .zip(&mut self.noise_rngs)
                .zip(&obs)
                .map(|((agent, rng), o)| agent.select_action(o, noise, rng))
                .collect::<Result<Vec<_>>>()?;
            let out = world.step(&actions)?;
            if let Some(t) = trace.as_deref_mut() {
                t.push(StepRecord::capture(&world, &actions, &out.rewards));
            }
            self.buffer.push(Transition {
                obs: obs.concat(),
                actions: actions.concat(),
                rewards: out.rewards.clone(),
                next_obs: out.observations.concat(),
            });
            if self.cfg.track_mi {
                for (agent, a) in self.agents.iter_mut().zip(&actions) {
                    agent.record_action(a)?;
                }
            }
            obs = out.observations;
            self.env_steps += 1;

            if self.update_due() {
                let step = world.timestep;
                let stats = self.update_round().map_err(|e| {
                    with_context(e, || format!("episode {}, step {step}", episode + 1))
                })?;
                for (sum, mi) in mi_sums.iter_mut().zip(&stats.mi) {
                    *sum += mi;
                }
                rounds += 1;
            }
            for (sum, r) in reward_sums.iter_mut().zip(&out.rewards) {
                *sum += r;
            }
        }

        self.episode += 1;
        let mean_mi = mi_sums
            .into_iter()
            .map(|s| if rounds == 0 { 0.0 } else { s / rounds as f64 })
            .collect();
        Ok(EpisodeLog {
            episode: self.episode,
            rewards: reward_sums,
            mean_mi,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        })
    }

    /// Runs the remaining episodes up to `cfg.episodes`, streaming each log.
    pub fn run(&mut self, mut on_episode: impl FnMut(&EpisodeLog)) -> Result<Vec<EpisodeLog>> {
        let mut logs = Vec::with_capacity(self.cfg.episodes.saturating_sub(self.episode));
        while self.episode < self.cfg.episodes {
            let log = self.run_episode(None)?;
            on_episode(&log);
            logs.push(log);
        }
        Ok(logs)
    }

    /// Greedy (noise-free) rollout of the current active actors; does not
    /// touch the replay buffer, windows or any training stream.
    pub fn evaluate(&self, world_seed: u64) -> Result<Vec<f64>> {
        let mut rng = Rng::new(world_seed);
        let mut world =
            World::new(self.scenario, &mut rng).with_max_steps(self.cfg.max_episode_length);
        let mut obs = world.observe_all();
        let mut sums = vec![0.0; self.agents.len()];
        while !world.is_done() {
            let actions = self
                .agents
                .iter()
                .zip(&obs)
                .map(|(agent, o)| agent.actor().predict(o))
                .collect::<Result<Vec<_>>>()?;
            let out = world.step(&actions)?;
            for (s, r) in sums.iter_mut().zip(&out.rewards) {
                *s += r;
            }
            obs = out.observations;
        }
        Ok(sums)
    }

    /// Actions of agent `i` currently held in its window (oldest first).
    pub fn window_actions(&self, agent: usize) -> Vec<Vec<f64>> {
        self.agents[agent]
            .window
            .iter()
            .map(<[f64]>::to_vec)
            .collect()
    }
}

/// Trains from scratch for `cfg.episodes` episodes, calling `on_episode` after each.
pub fn run_training(
    cfg: TrainConfig,
    scenario: Scenario,
    variants: &[Variant],
    seed: u64,
    on_episode: impl FnMut(&EpisodeLog),
) -> Result<Vec<EpisodeLog>> {
    Trainer::new(cfg, scenario, variants, seed)?.run(on_episode)
}
