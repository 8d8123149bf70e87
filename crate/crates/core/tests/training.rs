use clmaddpg::maddpg::{run_training, TrainConfig, Trainer, Variant};
use clmaddpg::particle_envs::{Role, Scenario};

fn quick(episodes: usize) -> TrainConfig {
    TrainConfig {
        batch_size: 32,
        warmup: Some(64),
        hidden: 32,
        episodes,
        ..Default::default()
    }
}

#[test]
fn zero_beta_matches_the_baseline_and_the_untracked_path() {
    let n = 3;
    let run = |cfg: TrainConfig, variant: Variant| {
        let mut t = Trainer::new(cfg, Scenario::CoopNavigation, &vec![variant; n], 42).unwrap();
        let logs = t.run(|_| {}).unwrap();
        (t.parameter_snapshot(), logs, t.update_rounds())
    };
    let (base_params, base_logs, rounds) = run(quick(8), Variant::Baseline);
    let (zero_params, zero_logs, _) = run(quick(8), Variant::CapacityLimited { beta: 0.0 });
    let untracked = TrainConfig {
        track_mi: false,
        ..quick(8)
    };
    let (plain_params, _, _) = run(untracked, Variant::Baseline);

    assert!(rounds > 100);
    assert!(base_logs
        .iter()
        .any(|l| l.mean_mi.iter().any(|&m| m != 0.0)));
    assert_eq!(base_logs, zero_logs);
    assert_eq!(base_params, zero_params);
    assert_eq!(base_params, plain_params);
}

#[test]
fn positive_beta_changes_training() {
    let n = 3;
    let a = run_training(
        quick(6),
        Scenario::CoopNavigation,
        &vec![Variant::Baseline; n],
        1,
        |_| {},
    )
    .unwrap();
    let b = run_training(
        quick(6),
        Scenario::CoopNavigation,
        &vec![Variant::CapacityLimited { beta: 1e-2 }; n],
        1,
        |_| {},
    )
    .unwrap();
    assert_ne!(a, b);
}

#[test]
fn same_seed_same_logs_different_seed_different_logs() {
    let variants = [Variant::CapacityLimited { beta: 1e-3 }, Variant::Baseline];
    let go = |seed| run_training(quick(5), Scenario::KeepAway, &variants, seed, |_| {}).unwrap();
    assert_eq!(go(3), go(3));
    assert_ne!(go(3), go(4));
}

#[test]
fn matchup_assigns_variants_by_agent() {
    let variants = [Variant::Baseline, Variant::CapacityLimited { beta: 1e-3 }];
    let t = Trainer::new(quick(1), Scenario::KeepAway, &variants, 1).unwrap();
    assert_eq!(t.agents()[0].role, Role::Good);
    assert_eq!(t.agents()[1].role, Role::Adversary);
    assert_eq!(
        t.agents()[1].variant,
        Variant::CapacityLimited { beta: 1e-3 }
    );
}

#[test]
fn ensembles_train_only_the_drawn_member() {
    let cfg = TrainConfig {
        ensemble_k: 3,
        ..quick(1)
    };
    let n = 2;
    let mut t = Trainer::new(
        cfg,
        Scenario::CoopCommunication,
        &vec![Variant::Baseline; n],
        8,
    )
    .unwrap();
    // Fill the buffer past warm-up so the next episode trains.
    for _ in 0..3 {
        t.run_episode(None).unwrap();
    }
    let before: Vec<_> = t.agents().iter().map(|a| a.actors.clone()).collect();
    t.run_episode(None).unwrap();
    for (agent, old) in t.agents().iter().zip(&before) {
        for (k, (now, was)) in agent.actors.iter().zip(old).enumerate() {
            assert_eq!(
                now.parameters() != was.parameters(),
                k == agent.active,
                "member {k}"
            );
        }
    }
}

#[test]
fn checkpoint_restores_a_resumable_trainer() {
    let variants = [Variant::CapacityLimited { beta: 1e-3 }, Variant::Baseline];
    let mut t = Trainer::new(quick(4), Scenario::CoopCommunication, &variants, 5).unwrap();
    t.run_episode(None).unwrap();
    let bytes = t.save_checkpoint();
    let mut other = Trainer::new(quick(4), Scenario::CoopCommunication, &variants, 6).unwrap();
    other.load_checkpoint(&bytes).unwrap();
    assert_eq!(other.save_checkpoint(), bytes);
    assert_eq!(other.episodes_done(), 1);
    assert_eq!(other.evaluate(3).unwrap(), t.evaluate(3).unwrap());
}
