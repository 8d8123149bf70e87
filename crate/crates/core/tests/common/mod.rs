//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use clmaddpg::maddpg::update::{actor_gradient, critic_gradient, critic_loss, policy_objective};
use clmaddpg::maddpg::{Layout, Minibatch, TrainConfig, Trainer, Transition, Variant};
use clmaddpg::numerics::gradcheck::{max_relative_error, numerical_gradient, DEFAULT_STEP};
use clmaddpg::numerics::Rng;
use clmaddpg::particle_envs::{Scenario, World};
use ndarray::{Array1, Array2};

pub fn random_batch(layout: &Layout, size: usize, rng: &mut Rng) -> Minibatch {
    let transitions: Vec<Transition> = (0..size)
        .map(|_| {
            let mut vec = |n: usize| (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect::<Vec<f64>>();
            Transition {
                obs: vec(layout.joint_obs_dim()),
                actions: vec(layout.joint_act_dim()),
                rewards: vec(layout.num_agents()),
                next_obs: vec(layout.joint_obs_dim()),
            }
        })
        .collect();
    Minibatch::from_transitions(&transitions).unwrap()
}

/// Worst relative errors of the critic and actor gradients for one random
/// scenario, width, batch and agent.
pub struct GradientCase {
    pub description: String,
    pub critic_error: f64,
    pub actor_error: f64,
}

pub fn gradient_case(seed: u64) -> GradientCase {
    let mut rng = Rng::with_stream(seed, 77);
    let scenario = Scenario::ALL[rng.index(Scenario::ALL.len())];
    let hidden = 3 + rng.index(8);
    let size = 2 + rng.index(5);
    let cfg = TrainConfig {
        hidden,
        batch_size: 2,
        ..Default::default()
    };
    let n = scenario.roles().len();
    let mut trainer = Trainer::new(cfg, scenario, &vec![Variant::Baseline; n], seed).unwrap();
    let layout = trainer.layout().clone();
    let agent_index = rng.index(n);
    let batch = random_batch(&layout, size, &mut rng);
    let y = Array1::from_shape_fn(size, |_| rng.uniform(-2.0, 2.0));
    let agent = &mut trainer.agents_mut()[agent_index];

    critic_gradient(agent, &batch, y.view()).unwrap();
    let analytic = agent.critic.gradients();
    let mut probe = agent.clone();
    let numeric = numerical_gradient(&agent.critic.parameters(), DEFAULT_STEP, |p| {
        probe.critic.set_parameters(p)?;
        critic_loss(&probe, &batch, y.view())
    })
    .unwrap();
    let critic_error = max_relative_error(&analytic, &numeric);

    actor_gradient(agent, &batch, &layout, agent_index).unwrap();
    // The update minimizes -(1/S) sum Q, so the descent gradient is the
    // negated gradient of the objective.
    let analytic: Vec<f64> = agent.actor().gradients().iter().map(|g| -g).collect();
    let mut probe = agent.clone();
    let k = probe.active;
    let numeric = numerical_gradient(&agent.actor().parameters(), DEFAULT_STEP, |p| {
        probe.actors[k].set_parameters(p)?;
        policy_objective(&probe, &batch, &layout, agent_index)
    })
    .unwrap();
    let actor_error = max_relative_error(&analytic, &numeric);

    GradientCase {
        description: format!("{scenario} agent {agent_index} hidden {hidden} batch {size}"),
        critic_error,
        actor_error,
    }
}

/// Direct-space plug-in entropy: densities are multiplied out, not summed in logs.
pub fn brute_entropy(mean: &[f64], var: &[f64], batch: &Array2<f64>) -> f64 {
    let mut h = 0.0;
    for row in batch.rows() {
        let mut p = 1.0;
        for d in 0..mean.len() {
            let z = row[d] - mean[d];
            p *= (-z * z / (2.0 * var[d])).exp() / (2.0 * std::f64::consts::PI * var[d]).sqrt();
        }
        if p > 0.0 {
            h -= p * p.ln();
        }
    }
    h
}

/// Population moments with the `1e-6` variance floor.
pub fn brute_moments(batch: &Array2<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = batch.nrows() as f64;
    let mut mean = Vec::new();
    let mut var = Vec::new();
    for col in batch.columns() {
        let m = col.iter().sum::<f64>() / n;
        let v = col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
        mean.push(m);
        var.push(v.max(1e-6));
    }
    (mean, var)
}

pub fn brute_mi(mean: &[f64], var: &[f64], batch: &Array2<f64>) -> f64 {
    let (bm, bv) = brute_moments(batch);
    brute_entropy(mean, var, batch) - brute_entropy(&bm, &bv, batch)
}

/// Position offset after `n` steps of a constant force from rest:
/// `v_n = F dt (1 - r^n) / d` and `x_n = F dt^2 (n - r (1 - r^n) / d) / d`
/// with `r = 1 - d`, unit mass.
pub fn damped_offset(force: f64, dt: f64, damping: f64, n: i32) -> f64 {
    let r = 1.0 - damping;
    force * dt * dt * (n as f64 - r * (1.0 - r.powi(n)) / damping) / damping
}

/// Negates the x axis of every position and velocity.
pub fn mirror_world(world: &World) -> World {
    let mut m = world.clone();
    for e in m.agents.iter_mut().chain(m.landmarks.iter_mut()) {
        e.position[0] = -e.position[0];
        e.velocity[0] = -e.velocity[0];
    }
    m
}

/// Negates the x force of every moving agent; messages are unchanged.
pub fn mirror_actions(world: &World, actions: &[Vec<f64>]) -> Vec<Vec<f64>> {
    actions
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let mut a = a.clone();
            if world.action_dim(i) == 2 {
                a[0] = -a[0];
            }
            a
        })
        .collect()
}

pub fn random_actions(world: &World, rng: &mut Rng) -> Vec<Vec<f64>> {
    (0..world.num_agents())
        .map(|i| {
            (0..world.action_dim(i))
                .map(|_| rng.uniform(-1.2, 1.2))
                .collect()
        })
        .collect()
}

/// Largest deviation between `world` mirrored and `mirrored` after stepping both.
pub fn mirror_error(world: &World, mirrored: &World) -> f64 {
    let expected = mirror_world(world);
    expected
        .agents
        .iter()
        .chain(&expected.landmarks)
        .zip(mirrored.agents.iter().chain(&mirrored.landmarks))
        .flat_map(|(a, b)| {
            (0..2).flat_map(move |d| {
                [
                    (a.position[d] - b.position[d]).abs(),
                    (a.velocity[d] - b.velocity[d]).abs(),
                ]
            })
        })
        .fold(0.0, f64::max)
}

pub struct MiOracle {
    pub instances: usize,
    pub max_entropy_error: f64,
    pub max_mi_error: f64,
    /// MI of the constructed instance whose batch is far wider than the marginal.
    pub negative_mi: f64,
}

/// Random (marginal, batch) pairs plus one constructed negative-MI instance.
pub fn mi_oracle(random_instances: usize, seed: u64) -> MiOracle {
    use clmaddpg::gaussian_stats::{plugin_entropy, policy_mutual_information, DiagGaussian};

    let mut rng = Rng::new(seed);
    let mut cases: Vec<(Vec<f64>, Vec<f64>, Array2<f64>)> = (0..random_instances)
        .map(|_| {
            let dim = 1 + rng.index(3);
            let rows = 2 + rng.index(60);
            let mean = (0..dim).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let var = (0..dim).map(|_| rng.uniform(0.05, 1.5)).collect();
            let spread = rng.uniform(0.05, 1.0);
            let batch = Array2::from_shape_fn((rows, dim), |_| rng.uniform(-spread, spread));
            (mean, var, batch)
        })
        .collect();
    let wide = Array2::from_shape_fn(
        (40, 2),
        |(i, d)| if (i + d) % 2 == 0 { 2.0 } else { -2.0 } * (1.0 + i as f64 / 40.0),
    );
    cases.push((vec![0.0, 0.0], vec![0.01, 0.01], wide));

    let mut out = MiOracle {
        instances: cases.len(),
        max_entropy_error: 0.0,
        max_mi_error: 0.0,
        negative_mi: 0.0,
    };
    for (mean, var, batch) in &cases {
        let g = DiagGaussian::new(mean.clone(), var.clone()).unwrap();
        let h = plugin_entropy(&g, batch.view()).unwrap();
        out.max_entropy_error = out
            .max_entropy_error
            .max((h - brute_entropy(mean, var, batch)).abs());
        let mi = policy_mutual_information(&g, batch.view()).unwrap();
        out.max_mi_error = out
            .max_mi_error
            .max((mi - brute_mi(mean, var, batch)).abs());
        out.negative_mi = mi;
    }
    out
}

/// Largest per-dimension gap between `running_update` and the closed-form
/// unrolled mixture after `steps` updates.
pub fn recursion_error(alpha: f64, steps: usize, seed: u64) -> f64 {
    use clmaddpg::gaussian_stats::MarginalEstimate;

    let dim = 3;
    let mut rng = Rng::new(seed);
    let obs: Vec<(Vec<f64>, Vec<f64>)> = (0..=steps)
        .map(|_| {
            (
                (0..dim).map(|_| rng.uniform(-1.0, 1.0)).collect(),
                (0..dim).map(|_| rng.uniform(0.1, 1.0)).collect(),
            )
        })
        .collect();
    let mut m = MarginalEstimate::new(alpha).unwrap();
    for (mu, var) in &obs {
        m.running_update(mu, var).unwrap();
    }
    let g = m.gaussian().unwrap();

    // Observation 0 initializes the estimate; observation t >= 1 ends with
    // weight alpha (1 - alpha)^(steps - t), the initial one with (1 - alpha)^steps.
    let weight = |t: usize| {
        let decay = (1.0 - alpha).powi((steps - t) as i32);
        if t == 0 {
            decay
        } else {
            alpha * decay
        }
    };
    let mut err: f64 = 0.0;
    for d in 0..dim {
        let mean: f64 = (0..=steps).map(|t| weight(t) * obs[t].0[d]).sum();
        let second: f64 = (0..=steps)
            .map(|t| weight(t) * (obs[t].1[d] + obs[t].0[d].powi(2)))
            .sum();
        err = err
            .max((g.mean()[d] - mean).abs())
            .max((g.variance()[d] - (second - mean * mean)).abs());
    }
    err
}

/// Worst relative gap between `mixture_moments` and the moments of
/// `samples` draws from the mixture.
pub fn mixture_mc_error(samples: usize, seed: u64) -> f64 {
    use clmaddpg::gaussian_stats::mixture_moments;

    let weights = [0.2, 0.5, 0.3];
    let means = vec![vec![1.0, 3.0], vec![2.0, 5.0], vec![4.0, 2.0]];
    let vars = vec![vec![0.5, 1.0], vec![1.0, 0.3], vec![2.0, 0.8]];
    let analytic = mixture_moments(&weights, &means, &vars).unwrap();

    let mut rng = Rng::new(seed);
    let mut sum = [0.0; 2];
    let mut sum_sq = [0.0; 2];
    for _ in 0..samples {
        let u = rng.uniform(0.0, 1.0);
        let k = if u < 0.2 {
            0
        } else if u < 0.7 {
            1
        } else {
            2
        };
        for d in 0..2 {
            let x = means[k][d] + vars[k][d].sqrt() * rng.standard_normal();
            sum[d] += x;
            sum_sq[d] += x * x;
        }
    }
    let n = samples as f64;
    (0..2)
        .map(|d| {
            let m = sum[d] / n;
            let v = sum_sq[d] / n - m * m;
            let em = ((m - analytic.mean()[d]) / analytic.mean()[d]).abs();
            let ev = ((v - analytic.variance()[d]) / analytic.variance()[d]).abs();
            em.max(ev)
        })
        .fold(0.0, f64::max)
}
