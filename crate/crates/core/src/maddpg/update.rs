//! Centralized-critic targets and the per-agent critic/actor gradient steps.

use ndarray::{concatenate, s, Array1, Array2, ArrayView1, Axis};

use crate::{Error, Result};

use super::agent::Agent;
use super::config::Variant;
use super::replay::{Layout, Minibatch};

/// Joint next action `a'` from every agent's *target* actor on `x'`.
pub fn target_joint_actions(
    batch: &Minibatch,
    agents: &[Agent],
    layout: &Layout,
) -> Result<Array2<f64>> {
    let blocks = agents
        .iter()
        .enumerate()
        .map(|(j, agent)| {
            let obs_j = batch.next_obs.slice(s![.., layout.obs_range(j)]);
            agent.target_actor().predict_batch(obs_j)
        })
        .collect::<Result<Vec<_>>>()?;
    let views: Vec<_> = blocks.iter().map(|b| b.view()).collect();
    concatenate(Axis(1), &views).map_err(|e| Error::Config(format!("joint action assembly: {e}")))
}

fn critic_input(obs: &Array2<f64>, actions: &Array2<f64>) -> Result<Array2<f64>> {
    concatenate(Axis(1), &[obs.view(), actions.view()])
        .map_err(|e| Error::Config(format!("critic input assembly: {e}")))
}

/// Per-sample critic target for agent `i`.
///
/// Baseline: `y = r_i + gamma Q'_i(x', a')`.
/// Capacity-limited: `y = (r_i - beta * mi_value) + gamma Q'_i(x', a')`, with
/// the same scalar `mi_value` subtracted from every sample.
pub fn critic_target(
    batch: &Minibatch,
    agents: &[Agent],
    layout: &Layout,
    agent: usize,
    mi_value: f64,
    gamma: f64,
) -> Result<Array1<f64>> {
    let next_actions = target_joint_actions(batch, agents, layout)?;
    let q_next = agents[agent]
        .target_critic
        .predict_batch(critic_input(&batch.next_obs, &next_actions)?.view())?
        .column(0)
        .to_owned();
    let rewards = batch.rewards.column(agent);
    let y = match agents[agent].variant {
        Variant::Baseline => {
            Array1::from_shape_fn(rewards.len(), |j| rewards[j] + gamma * q_next[j])
        }
        Variant::CapacityLimited { beta } => {
            let penalty = beta * mi_value;
            Array1::from_shape_fn(rewards.len(), |j| {
                (rewards[j] - penalty) + gamma * q_next[j]
            })
        }
    };
    Ok(y)
}

/// Mean squared TD error of the live critic against `y` (no optimizer step).
pub fn critic_loss(agent: &Agent, batch: &Minibatch, y: ArrayView1<f64>) -> Result<f64> {
    let q = agent
        .critic
        .predict_batch(critic_input(&batch.obs, &batch.actions)?.view())?;
    Ok(q.column(0)
        .iter()
        .zip(y.iter())
        .map(|(q, y)| (q - y) * (q - y))
        .sum::<f64>()
        / y.len() as f64)
}

/// Accumulates the critic gradient of the mean squared error against `y`
/// and returns the loss. Gradient buffers are left populated.
pub fn critic_gradient(agent: &mut Agent, batch: &Minibatch, y: ArrayView1<f64>) -> Result<f64> {
    if y.len() != batch.len() {
        return Err(Error::Config(format!(
            "{} targets for {} samples",
            y.len(),
            batch.len()
        )));
    }
    let n = y.len() as f64;
    let q = agent
        .critic
        .forward_batch(critic_input(&batch.obs, &batch.actions)?.view())?;
    let diff = &q.column(0) - &y;
    let loss = diff.iter().map(|d| d * d).sum::<f64>() / n;
    if !loss.is_finite() {
        return Err(Error::NonFinite(format!("critic loss {loss}")));
    }
    let upstream = (diff * (2.0 / n)).insert_axis(Axis(1));
    agent.critic.zero_grad();
    agent.critic.backward_batch(upstream.view())?;
    Ok(loss)
}

/// One optimizer step on `(1/S) sum_j (y_j - Q(x_j, a_j))^2`. Returns the
/// loss measured before the step.
pub fn critic_update(agent: &mut Agent, batch: &Minibatch, y: ArrayView1<f64>) -> Result<f64> {
    let loss = critic_gradient(agent, batch, y)?;
    agent.critic_optimizer.step(&mut agent.critic)?;
    Ok(loss)
}

/// Accumulates the sampled policy gradient of `-(1/S) sum_j Q_i(x_j, ..., mu_i(o_i^j), ...)`
/// into the active actor's buffers, keeping the other agents' sampled
/// actions. Returns the actor gradient norm; the critic's buffers are cleared.
pub fn actor_gradient(
    agent: &mut Agent,
    batch: &Minibatch,
    layout: &Layout,
    index: usize,
) -> Result<f64> {
    let n = batch.len() as f64;
    let obs_i = batch.obs.slice(s![.., layout.obs_range(index)]);
    let k = agent.active;
    agent.actors[k].zero_grad();
    let own = agent.actors[k].forward_batch(obs_i)?;

    let mut actions = batch.actions.clone();
    actions
        .slice_mut(s![.., layout.act_range(index)])
        .assign(&own);
    let input = critic_input(&batch.obs, &actions)?;
    agent.critic.forward_batch(input.view())?;
    let upstream = Array2::from_elem((batch.len(), 1), -1.0 / n);
    let grad_input = agent.critic.backward_batch(upstream.view())?;
    agent.critic.zero_grad();

    let offset = layout.joint_obs_dim();
    let range = layout.act_range(index);
    let grad_action = grad_input.slice(s![.., offset + range.start..offset + range.end]);
    agent.actors[k].backward_batch(grad_action)?;
    Ok(agent.actors[k].grad_norm())
}

/// Ascent step on the sampled policy gradient for the active ensemble member.
pub fn actor_update(
    agent: &mut Agent,
    batch: &Minibatch,
    layout: &Layout,
    index: usize,
) -> Result<f64> {
    let norm = actor_gradient(agent, batch, layout, index)?;
    let k = agent.active;
    agent.actor_optimizers[k].step(&mut agent.actors[k])?;
    Ok(norm)
}

/// `(1/S) sum_j Q_i(x_j, ..., mu_i(o_i^j), ...)` without side effects.
pub fn policy_objective(
    agent: &Agent,
    batch: &Minibatch,
    layout: &Layout,
    index: usize,
) -> Result<f64> {
    let obs_i = batch.obs.slice(s![.., layout.obs_range(index)]);
    let own = agent.actor().predict_batch(obs_i)?;
    let mut actions = batch.actions.clone();
    actions
        .slice_mut(s![.., layout.act_range(index)])
        .assign(&own);
    let q = agent
        .critic
        .predict_batch(critic_input(&batch.obs, &actions)?.view())?;
    Ok(q.sum() / batch.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maddpg::config::TrainConfig;
    use crate::maddpg::replay::Transition;
    use crate::numerics::{Activation, DenseNet, Layer, Rng};
    use crate::particle_envs::Role;
    use ndarray::array;

    fn setup(variant: Variant, rng: &mut Rng) -> (Vec<Agent>, Layout, Minibatch) {
        let layout = Layout::new(vec![3, 2], vec![2, 1]);
        let cfg = TrainConfig {
            hidden: 6,
            ..Default::default()
        };
        let agents = (0..2)
            .map(|i| {
                Agent::new(
                    Role::Good,
                    variant,
                    layout.obs_dims[i],
                    layout.act_dims[i],
                    layout.critic_in_dim(),
                    &cfg,
                    rng,
                )
                .unwrap()
            })
            .collect();
        let transitions: Vec<Transition> = (0..8)
            .map(|_| Transition {
                obs: (0..5).map(|_| rng.uniform(-1.0, 1.0)).collect(),
                actions: (0..3).map(|_| rng.uniform(-1.0, 1.0)).collect(),
                rewards: (0..2).map(|_| rng.uniform(-1.0, 1.0)).collect(),
                next_obs: (0..5).map(|_| rng.uniform(-1.0, 1.0)).collect(),
            })
            .collect();
        (
            agents,
            layout,
            Minibatch::from_transitions(&transitions).unwrap(),
        )
    }

    #[test]
    fn zero_beta_reduces_to_the_baseline_target() {
        let mut rng = Rng::new(1);
        let (mut agents, layout, batch) = setup(Variant::Baseline, &mut rng);
        let base = critic_target(&batch, &agents, &layout, 0, 3.7, 0.95).unwrap();
        agents[0].variant = Variant::CapacityLimited { beta: 0.0 };
        let cl = critic_target(&batch, &agents, &layout, 0, 3.7, 0.95).unwrap();
        assert_eq!(base, cl);

        let y = critic_target(&batch, &agents, &layout, 0, 3.7, 0.0).unwrap();
        assert_eq!(y, batch.rewards.column(0).to_owned());
    }

    #[test]
    fn penalty_is_subtracted_from_every_sample() {
        let mut rng = Rng::new(2);
        let (mut agents, layout, mut batch) =
            setup(Variant::CapacityLimited { beta: 1e-3 }, &mut rng);
        batch.rewards.fill(1.0);
        let y = critic_target(&batch, &agents, &layout, 1, 2.0, 0.0).unwrap();
        assert!(y.iter().all(|&v| v == 1.0 - 1e-3 * 2.0));
        assert!((y[0] - 0.998).abs() < 1e-15);
        agents[1].variant = Variant::Baseline;
        let y = critic_target(&batch, &agents, &layout, 1, 2.0, 0.0).unwrap();
        assert!(y.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn target_uses_target_actors_only() {
        let mut rng = Rng::new(3);
        let (mut agents, layout, batch) = setup(Variant::Baseline, &mut rng);
        let y = critic_target(&batch, &agents, &layout, 0, 0.0, 0.95).unwrap();
        for a in agents.iter_mut() {
            let p: Vec<f64> = a.actors[0].parameters().iter().map(|v| v + 0.5).collect();
            a.actors[0].set_parameters(&p).unwrap();
        }
        assert_eq!(
            critic_target(&batch, &agents, &layout, 0, 0.0, 0.95).unwrap(),
            y
        );
        let p: Vec<f64> = agents[1].target_actors[0]
            .parameters()
            .iter()
            .map(|v| v + 0.5)
            .collect();
        agents[1].target_actors[0].set_parameters(&p).unwrap();
        assert_ne!(
            critic_target(&batch, &agents, &layout, 0, 0.0, 0.95).unwrap(),
            y
        );
    }

    #[test]
    fn exact_targets_leave_the_critic_unchanged() {
        let mut rng = Rng::new(4);
        let (mut agents, _layout, batch) = setup(Variant::Baseline, &mut rng);
        let input = critic_input(&batch.obs, &batch.actions).unwrap();
        let y = agents[0]
            .critic
            .predict_batch(input.view())
            .unwrap()
            .column(0)
            .to_owned();
        let before = agents[0].critic.parameters();
        let loss = critic_update(&mut agents[0], &batch, y.view()).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(agents[0].critic.parameters(), before);
    }

    #[test]
    fn one_critic_step_descends_for_a_linear_critic() {
        let mut rng = Rng::new(5);
        let (mut agents, _layout, batch) = setup(Variant::Baseline, &mut rng);
        let linear = DenseNet::from_layers(vec![Layer::new(
            Array2::from_shape_fn((1, 8), |(_, j)| 0.1 * j as f64),
            array![0.0],
            Activation::Identity,
        )
        .unwrap()])
        .unwrap();
        agents[0].critic = linear;
        agents[0].critic_optimizer = crate::numerics::OptimizerState::new(
            &agents[0].critic,
            crate::numerics::AdamConfig {
                learning_rate: 1e-3,
                ..Default::default()
            },
        );
        let single = Minibatch {
            obs: batch.obs.slice(s![0..1, ..]).to_owned(),
            actions: batch.actions.slice(s![0..1, ..]).to_owned(),
            rewards: batch.rewards.slice(s![0..1, ..]).to_owned(),
            next_obs: batch.next_obs.slice(s![0..1, ..]).to_owned(),
        };
        let y = array![5.0];
        let before = critic_update(&mut agents[0], &single, y.view()).unwrap();
        let after = critic_loss(&agents[0], &single, y.view()).unwrap();
        assert!(after < before, "{after} !< {before}");
    }

    #[test]
    fn flat_critic_gives_zero_actor_gradient() {
        let mut rng = Rng::new(6);
        let (mut agents, layout, batch) = setup(Variant::Baseline, &mut rng);
        for layer in agents[0].critic.layers_mut() {
            layer.weights.fill(0.0);
        }
        let before = agents[0].actors[0].parameters();
        let norm = actor_update(&mut agents[0], &batch, &layout, 0).unwrap();
        assert_eq!(norm, 0.0);
        assert_eq!(agents[0].actors[0].parameters(), before);
    }
}
