mod common;

use clmaddpg::numerics::{Activation, AdamConfig, DenseNet, OptimizerState, Rng};
use common::gradient_case;
use ndarray::{Array1, Array2};

#[test]
fn actor_and_critic_gradients_match_finite_differences() {
    for seed in 0..20 {
        let case = gradient_case(seed);
        assert!(
            case.critic_error < 1e-4,
            "{}: critic {}",
            case.description,
            case.critic_error
        );
        assert!(
            case.actor_error < 1e-4,
            "{}: actor {}",
            case.description,
            case.actor_error
        );
    }
}

/// An actor trained against `Q(a) = -(a - 0.5)^2` climbs towards 0.5.
#[test]
fn actor_climbs_a_quadratic_bowl() {
    let mut actor = DenseNet::mlp(
        &[1, 16, 16, 1],
        Activation::Relu,
        Activation::Tanh,
        &mut Rng::new(1),
    )
    .unwrap();
    let last = actor.layers().len() - 1;
    let out = &mut actor.layers_mut()[last];
    out.weights.fill(0.0);
    out.bias = Array1::zeros(1);
    let config = AdamConfig {
        learning_rate: 1e-3,
        ..Default::default()
    };
    let mut opt = OptimizerState::new(&actor, config);
    let obs = Array2::from_elem((1, 1), 0.3);

    let mut prev = actor.predict(&[0.3]).unwrap()[0];
    assert_eq!(prev, 0.0);
    let mut arrived = false;
    for _ in 0..300 {
        let a = actor.forward_batch(obs.view()).unwrap()[[0, 0]];
        // Descend on -Q: d(-Q)/da = 2 (a - 0.5).
        actor
            .backward_batch(Array2::from_elem((1, 1), 2.0 * (a - 0.5)).view())
            .unwrap();
        opt.step(&mut actor).unwrap();
        let next = actor.predict(&[0.3]).unwrap()[0];
        if arrived {
            // Momentum may carry the output slightly past the optimum.
            assert!((next - 0.5).abs() < 0.01, "left the optimum: {next}");
        } else {
            assert!(next > prev, "{prev} -> {next}");
            arrived = next > 0.49;
        }
        prev = next;
    }
    assert!(arrived);
    assert!((prev - 0.5).abs() < 0.01, "ended at {prev}");
}
