//! Fast invariant checks that run inside the binary (`clmaddpg selftest`).

use ndarray::Array2;

use crate::gaussian_stats::{plugin_entropy, DiagGaussian, MarginalEstimate};
use crate::maddpg::{ReplayBuffer, TrainConfig, Trainer, Transition, Variant};
use crate::numerics::{gradcheck, Activation, DenseNet, Rng};
use crate::particle_envs::{Scenario, World};

use super::aggregate::aggregate_series;
use super::experiment::{read_episode_csv, write_episode_csv};

type Check = fn() -> Result<(), String>;

pub struct CheckOutcome {
    pub name: &'static str,
    pub result: Result<(), String>,
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn small_trainer(variant: Variant, seed: u64) -> Result<Trainer, String> {
    let cfg = TrainConfig {
        batch_size: 16,
        warmup: Some(64),
        hidden: 16,
        episodes: 6,
        ..Default::default()
    };
    let n = Scenario::CoopNavigation.roles().len();
    Trainer::new(cfg, Scenario::CoopNavigation, &vec![variant; n], seed).map_err(|e| e.to_string())
}

fn reduction_identity() -> Result<(), String> {
    let mut base = small_trainer(Variant::Baseline, 11)?;
    let mut zero = small_trainer(Variant::CapacityLimited { beta: 0.0 }, 11)?;
    let a = base.run(|_| {}).map_err(|e| e.to_string())?;
    let b = zero.run(|_| {}).map_err(|e| e.to_string())?;
    ensure(base.update_rounds() > 0, || "no update rounds ran".into())?;
    ensure(a == b, || "episode logs differ".into())?;
    ensure(
        base.parameter_snapshot() == zero.parameter_snapshot(),
        || "parameters differ".into(),
    )
}

fn determinism() -> Result<(), String> {
    let cl = Variant::CapacityLimited { beta: 1e-3 };
    let a = small_trainer(cl, 5)?
        .run(|_| {})
        .map_err(|e| e.to_string())?;
    let b = small_trainer(cl, 5)?
        .run(|_| {})
        .map_err(|e| e.to_string())?;
    ensure(a == b, || "same seed gave different logs".into())
}

fn gradients() -> Result<(), String> {
    let mut rng = Rng::new(3);
    for (sizes, out) in [
        (vec![4, 6, 6, 2], Activation::Tanh),
        (vec![7, 5, 5, 1], Activation::Identity),
    ] {
        let net =
            DenseNet::mlp(&sizes, Activation::Relu, out, &mut rng).map_err(|e| e.to_string())?;
        let rows = 3;
        let input = Array2::from_shape_fn((rows, sizes[0]), |_| rng.uniform(-1.0, 1.0));
        let weights =
            Array2::from_shape_fn((rows, *sizes.last().unwrap()), |_| rng.uniform(-1.0, 1.0));
        let check = gradcheck::check_network(&net, &input, &weights, gradcheck::DEFAULT_STEP)
            .map_err(|e| e.to_string())?;
        ensure(check.param_error < 1e-4 && check.input_error < 1e-4, || {
            format!(
                "relative errors {} / {}",
                check.param_error, check.input_error
            )
        })?;
    }
    Ok(())
}

fn entropy_oracle() -> Result<(), String> {
    let mut rng = Rng::new(8);
    for _ in 0..20 {
        let mean: Vec<f64> = (0..2).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let var: Vec<f64> = (0..2).map(|_| rng.uniform(0.01, 1.0)).collect();
        let g = DiagGaussian::new(mean.clone(), var.clone()).map_err(|e| e.to_string())?;
        let batch = Array2::from_shape_fn((10, 2), |_| rng.uniform(-1.0, 1.0));
        let mut expected = 0.0;
        for row in batch.rows() {
            let mut p = 1.0;
            for d in 0..2 {
                let z = row[d] - mean[d];
                p *= (-z * z / (2.0 * var[d])).exp() / (2.0 * std::f64::consts::PI * var[d]).sqrt();
            }
            if p > 0.0 {
                expected -= p * p.ln();
            }
        }
        let got = plugin_entropy(&g, batch.view()).map_err(|e| e.to_string())?;
        ensure((got - expected).abs() < 1e-10, || {
            format!("entropy {got} vs {expected}")
        })?;
    }
    Ok(())
}

fn recursion() -> Result<(), String> {
    let alpha = 0.5;
    let mut m = MarginalEstimate::new(alpha).map_err(|e| e.to_string())?;
    m.running_update(&[0.0], &[1.0])
        .map_err(|e| e.to_string())?;
    m.running_update(&[2.0], &[1.0])
        .map_err(|e| e.to_string())?;
    let g = m.gaussian().ok_or("marginal not initialized")?;
    // Mean 0.5 * 0 + 0.5 * 2 = 1; variance 1 + alpha (1 - alpha) * 2^2 = 2.
    ensure(g.mean() == [1.0] && g.variance() == [2.0], || {
        format!("got mean {:?}, variance {:?}", g.mean(), g.variance())
    })
}

fn physics() -> Result<(), String> {
    let mut world = World::new(Scenario::CoopCommunication, &mut Rng::new(2));
    let listener = 1;
    world.agents[listener].velocity = [0.0, 0.0];
    let start = world.agents[listener].position;
    let (dt, damping) = (world.physics.dt, world.physics.damping);
    for step in 1..=10 {
        world.integrate_physics(&[[0.0, 0.0], [1.0, 0.0]]);
        let mut v = 0.0;
        let mut x = 0.0;
        for _ in 0..step {
            v = (1.0 - damping) * v + dt;
            x += v * dt;
        }
        let got = world.agents[listener].position[0] - start[0];
        ensure((got - x).abs() < 1e-12, || {
            format!("step {step}: offset {got} vs {x}")
        })?;
    }
    Ok(())
}

fn replay_uniformity() -> Result<(), String> {
    let mut buf = ReplayBuffer::new(100);
    for k in 0..100 {
        buf.push(Transition {
            obs: vec![k as f64],
            actions: vec![0.0],
            rewards: vec![0.0],
            next_obs: vec![0.0],
        });
    }
    let mut counts = [0usize; 100];
    for i in buf
        .sample_indices(100_000, &mut Rng::new(4))
        .map_err(|e| e.to_string())?
    {
        counts[i] += 1;
    }
    ensure(counts.iter().all(|&c| (850..=1150).contains(&c)), || {
        format!("counts {counts:?}")
    })
}

fn csv_round_trip() -> Result<(), String> {
    let logs = small_trainer(Variant::Baseline, 2)?
        .run(|_| {})
        .map_err(|e| e.to_string())?;
    let mut bytes = Vec::new();
    write_episode_csv(&mut bytes, 3, &logs).map_err(|e| e.to_string())?;
    let back = read_episode_csv(bytes.as_slice()).map_err(|e| e.to_string())?;
    ensure(back == logs, || "episode CSV did not round-trip".into())
}

fn t_interval() -> Result<(), String> {
    let curve =
        aggregate_series(&[vec![0.0; 5], vec![2.0; 5]], 1, 5, 0.99).map_err(|e| e.to_string())?;
    let p = curve.points[0];
    ensure(
        p.mean == 1.0 && (p.half_width - 63.657).abs() < 5e-3,
        || format!("mean {} half-width {}", p.mean, p.half_width),
    )
}

/// Runs every check, in a fixed order.
pub fn run_selftest() -> Vec<CheckOutcome> {
    let checks: [(&'static str, Check); 9] = [
        ("reduction identity at beta = 0", reduction_identity),
        ("run determinism", determinism),
        ("network gradients vs finite differences", gradients),
        ("plug-in entropy vs direct sum", entropy_oracle),
        ("running marginal recursion", recursion),
        ("damped integrator closed form", physics),
        ("replay sampling uniformity", replay_uniformity),
        ("episode CSV round trip", csv_round_trip),
        ("two-seed t-interval", t_interval),
    ];
    checks
        .into_iter()
        .map(|(name, check)| CheckOutcome {
            name,
            result: check(),
        })
        .collect()
}
