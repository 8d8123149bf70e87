use std::fmt;
use std::str::FromStr;

use crate::numerics::Rng;
use crate::{Error, Result};

pub const DEFAULT_MAX_STEPS: usize = 25;
/// Length of the speaker's message in cooperative communication.
pub const MESSAGE_DIM: usize = 3;
const MOVE_DIM: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    CoopNavigation,
    CoopCommunication,
    KeepAway,
    PhysicalDeception,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::CoopNavigation,
        Scenario::CoopCommunication,
        Scenario::KeepAway,
        Scenario::PhysicalDeception,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::CoopNavigation => "coop_navigation",
            Scenario::CoopCommunication => "coop_communication",
            Scenario::KeepAway => "keep_away",
            Scenario::PhysicalDeception => "physical_deception",
        }
    }

    /// Every agent shares one reward.
    pub fn is_cooperative(self) -> bool {
        matches!(self, Scenario::CoopNavigation | Scenario::CoopCommunication)
    }

    pub fn roles(self) -> &'static [Role] {
        match self {
            Scenario::CoopNavigation => &[Role::Good, Role::Good, Role::Good],
            Scenario::CoopCommunication => &[Role::Speaker, Role::Listener],
            Scenario::KeepAway => &[Role::Good, Role::Adversary],
            Scenario::PhysicalDeception => &[Role::Good, Role::Good, Role::Adversary],
        }
    }

    pub fn num_landmarks(self) -> usize {
        match self {
            Scenario::CoopNavigation | Scenario::CoopCommunication => 3,
            Scenario::KeepAway | Scenario::PhysicalDeception => 2,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown scenario '{s}' (expected one of coop_navigation, coop_communication, keep_away, physical_deception)"
                ))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Good,
    Adversary,
    Speaker,
    Listener,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Good => "good",
            Role::Adversary => "adversary",
            Role::Speaker => "speaker",
            Role::Listener => "listener",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Role::Good, Role::Adversary, Role::Speaker, Role::Listener]
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown role '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Color {
    LightBlue,
    LightGreen,
    LightRed,
    Grey,
    DarkGrey,
    Red,
    Green,
    Blue,
    Black,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entity {
    pub position: [f64; 2],
    pub velocity: [f64; 2],
    pub radius: f64,
    pub mass: f64,
    pub movable: bool,
    pub color: Color,
}

impl Entity {
    fn new(position: [f64; 2], radius: f64, movable: bool, color: Color) -> Self {
        Self {
            position,
            velocity: [0.0, 0.0],
            radius,
            mass: 1.0,
            movable,
            color,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicsParams {
    pub dt: f64,
    pub damping: f64,
    pub contact_stiffness: f64,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self {
            dt: 0.1,
            damping: 0.25,
            contact_stiffness: 100.0,
        }
    }
}

pub const GOOD_RADIUS: f64 = 0.05;
pub const ADVERSARY_RADIUS: f64 = 0.075;
pub const LANDMARK_RADIUS: f64 = 0.08;

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub observations: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
    pub done: bool,
}

/// Scenario state. Stepping is a pure function of the world and the joint action.
#[derive(Clone, Debug, PartialEq)]
pub struct World {
    pub scenario: Scenario,
    pub agents: Vec<Entity>,
    pub roles: Vec<Role>,
    pub landmarks: Vec<Entity>,
    /// Landmark index of the goal (unused in cooperative navigation).
    pub target: usize,
    /// Last message emitted by the speaker.
    pub message: [f64; MESSAGE_DIM],
    pub timestep: usize,
    pub max_steps: usize,
    pub physics: PhysicsParams,
    /// Action components that arrived outside `[-1, 1]` and were clipped.
    pub clipped_actions: u64,
}

fn random_position(rng: &mut Rng) -> [f64; 2] {
    [rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)]
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

fn squared_distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Free-function form of [`World::new`].
pub fn make_scenario(scenario: Scenario, rng: &mut Rng) -> World {
    World::new(scenario, rng)
}

impl World {
    /// Fresh episode: entities uniform in `[-1, 1]^2` at rest, goal drawn from `rng`.
    pub fn new(scenario: Scenario, rng: &mut Rng) -> Self {
        let roles = scenario.roles().to_vec();
        let agents = roles
            .iter()
            .map(|role| {
                let position = random_position(rng);
                match role {
                    Role::Good => Entity::new(
                        position,
                        GOOD_RADIUS,
                        true,
                        if scenario == Scenario::KeepAway {
                            Color::LightGreen
                        } else {
                            Color::LightBlue
                        },
                    ),
                    Role::Adversary => {
                        Entity::new(position, ADVERSARY_RADIUS, true, Color::LightRed)
                    }
                    Role::Speaker => Entity::new(position, GOOD_RADIUS, false, Color::Grey),
                    Role::Listener => Entity::new(position, GOOD_RADIUS, true, Color::LightGreen),
                }
            })
            .collect();
        let colors: &[Color] = match scenario {
            Scenario::CoopNavigation => &[Color::DarkGrey, Color::DarkGrey, Color::DarkGrey],
            Scenario::CoopCommunication => &[Color::Red, Color::Green, Color::Blue],
            Scenario::KeepAway => &[Color::Green, Color::Blue],
            Scenario::PhysicalDeception => &[Color::Green, Color::Black],
        };
        let mut landmarks: Vec<Entity> = colors
            .iter()
            .map(|&c| Entity::new(random_position(rng), LANDMARK_RADIUS, false, c))
            .collect();
        let target = match scenario {
            Scenario::CoopNavigation => 0,
            _ => rng.index(landmarks.len()),
        };
        if scenario == Scenario::PhysicalDeception {
            // The target is always drawn green, whichever slot it occupies.
            for (k, l) in landmarks.iter_mut().enumerate() {
                l.color = if k == target {
                    Color::Green
                } else {
                    Color::Black
                };
            }
        }
        Self {
            scenario,
            agents,
            roles,
            landmarks,
            target,
            message: [0.0; MESSAGE_DIM],
            timestep: 0,
            max_steps: DEFAULT_MAX_STEPS,
            physics: PhysicsParams::default(),
            clipped_actions: 0,
        }
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn is_done(&self) -> bool {
        self.timestep >= self.max_steps
    }

    pub fn action_dim(&self, agent: usize) -> usize {
        match self.roles[agent] {
            Role::Speaker => MESSAGE_DIM,
            _ => MOVE_DIM,
        }
    }

    pub fn action_dims(&self) -> Vec<usize> {
        (0..self.num_agents()).map(|i| self.action_dim(i)).collect()
    }

    pub fn obs_dim(&self, agent: usize) -> usize {
        self.observe(agent).len()
    }

    pub fn obs_dims(&self) -> Vec<usize> {
        (0..self.num_agents()).map(|i| self.obs_dim(i)).collect()
    }

    pub fn observe_all(&self) -> Vec<Vec<f64>> {
        (0..self.num_agents()).map(|i| self.observe(i)).collect()
    }

    /// Advances one timestep. Out-of-range action components are clipped to
    /// `[-1, 1]` and counted in [`World::clipped_actions`].
    pub fn step(&mut self, actions: &[Vec<f64>]) -> Result<StepOutcome> {
        if self.is_done() {
            return Err(Error::Usage(format!(
                "episode already finished after {} steps",
                self.timestep
            )));
        }
        if actions.len() != self.num_agents() {
            return Err(Error::Config(format!(
                "expected actions for {} agents, got {}",
                self.num_agents(),
                actions.len()
            )));
        }
        let mut forces = vec![[0.0; 2]; self.num_agents()];
        for (i, action) in actions.iter().enumerate() {
            if action.len() != self.action_dim(i) {
                return Err(Error::Config(format!(
                    "agent {i} expects a {}-dimensional action, got {}",
                    self.action_dim(i),
                    action.len()
                )));
            }
            let clipped: Vec<f64> = action
                .iter()
                .map(|&a| {
                    let c = if a.is_nan() { 0.0 } else { a.clamp(-1.0, 1.0) };
                    if c != a {
                        self.clipped_actions += 1;
                    }
                    c
                })
                .collect();
            match self.roles[i] {
                Role::Speaker => self.message.copy_from_slice(&clipped),
                _ => forces[i] = [clipped[0], clipped[1]],
            }
        }

        self.integrate_physics(&forces);
        self.timestep += 1;
        Ok(StepOutcome {
            observations: self.observe_all(),
            rewards: (0..self.num_agents()).map(|i| self.reward(i)).collect(),
            done: self.is_done(),
        })
    }

    /// Damped semi-implicit Euler with spring contacts between movable agents:
    /// `v <- (1 - damping) v + (F_action + F_contact) / m * dt`, `p <- p + v dt`.
    pub fn integrate_physics(&mut self, forces: &[[f64; 2]]) {
        let mut total = forces.to_vec();
        total.resize(self.agents.len(), [0.0; 2]);
        let k = self.physics.contact_stiffness;
        for i in 0..self.agents.len() {
            for j in (i + 1)..self.agents.len() {
                let (a, b) = (&self.agents[i], &self.agents[j]);
                if !(a.movable && b.movable) {
                    continue;
                }
                let d = [a.position[0] - b.position[0], a.position[1] - b.position[1]];
                let dist = (d[0] * d[0] + d[1] * d[1]).sqrt();
                let overlap = a.radius + b.radius - dist;
                if overlap <= 0.0 || dist == 0.0 {
                    continue;
                }
                let scale = k * overlap / dist;
                let f = [scale * d[0], scale * d[1]];
                total[i][0] += f[0];
                total[i][1] += f[1];
                total[j][0] -= f[0];
                total[j][1] -= f[1];
            }
        }

        let PhysicsParams { dt, damping, .. } = self.physics;
        for (agent, force) in self.agents.iter_mut().zip(&total) {
            if !agent.movable {
                continue;
            }
            for (d, f) in force.iter().enumerate() {
                agent.velocity[d] = (1.0 - damping) * agent.velocity[d] + f / agent.mass * dt;
                agent.position[d] += agent.velocity[d] * dt;
            }
        }
    }

    fn relative(&self, from: usize, to: [f64; 2]) -> [f64; 2] {
        let p = self.agents[from].position;
        [to[0] - p[0], to[1] - p[1]]
    }

    /// Observation layout per role:
    ///
    /// | scenario / role            | layout                                                     |
    /// |----------------------------|------------------------------------------------------------|
    /// | coop_navigation            | vel, pos, 3 landmarks (rel), 2 other agents (rel)          |
    /// | coop_communication speaker | one-hot target colour (3)                                  |
    /// | coop_communication listener| vel, pos, 3 landmarks (rel), speaker message (3)           |
    /// | keep_away good             | vel, pos, target (rel), 2 landmarks (rel), adversary (rel) |
    /// | keep_away adversary        | vel, pos, 2 landmarks (rel), good agent (rel)              |
    /// | physical_deception good    | vel, pos, target (rel), 2 landmarks (rel), others (rel)    |
    /// | physical_deception adversary| vel, pos, 2 landmarks (rel), others (rel)                 |
    ///
    /// "rel" blocks are `other - self`; agent blocks follow agent index order.
    /// Adversaries never see which landmark is the target.
    pub fn observe(&self, agent: usize) -> Vec<f64> {
        let role = self.roles[agent];
        if role == Role::Speaker {
            let mut one_hot = vec![0.0; self.landmarks.len()];
            one_hot[self.target] = 1.0;
            return one_hot;
        }

        let me = &self.agents[agent];
        let mut obs = Vec::with_capacity(16);
        obs.extend_from_slice(&me.velocity);
        obs.extend_from_slice(&me.position);
        let sees_target = role == Role::Good
            && matches!(
                self.scenario,
                Scenario::KeepAway | Scenario::PhysicalDeception
            );
        if sees_target {
            obs.extend_from_slice(&self.relative(agent, self.landmarks[self.target].position));
        }
        for l in &self.landmarks {
            obs.extend_from_slice(&self.relative(agent, l.position));
        }
        match self.scenario {
            Scenario::CoopCommunication => obs.extend_from_slice(&self.message),
            _ => {
                for (j, other) in self.agents.iter().enumerate() {
                    if j != agent {
                        obs.extend_from_slice(&self.relative(agent, other.position));
                    }
                }
            }
        }
        obs
    }

    /// Dense per-step reward. Cooperative scenarios hand every agent the same value.
    pub fn reward(&self, agent: usize) -> f64 {
        let target = self.landmarks[self.target].position;
        match self.scenario {
            Scenario::CoopNavigation => {
                let coverage: f64 = self
                    .landmarks
                    .iter()
                    .map(|l| {
                        self.agents
                            .iter()
                            .map(|a| distance(a.position, l.position))
                            .fold(f64::INFINITY, f64::min)
                    })
                    .sum();
                -coverage - self.collision_pairs() as f64
            }
            Scenario::CoopCommunication => {
                let listener = self
                    .roles
                    .iter()
                    .position(|&r| r == Role::Listener)
                    .expect("listener present");
                -squared_distance(self.agents[listener].position, target)
            }
            Scenario::KeepAway => {
                let good = &self.agents[0];
                let good_to_target = distance(good.position, target);
                match self.roles[agent] {
                    Role::Adversary => {
                        good_to_target - distance(self.agents[agent].position, good.position)
                    }
                    _ => -good_to_target,
                }
            }
            Scenario::PhysicalDeception => {
                let adversary = self
                    .roles
                    .iter()
                    .position(|&r| r == Role::Adversary)
                    .expect("adversary present");
                let adversary_to_target = distance(self.agents[adversary].position, target);
                match self.roles[agent] {
                    Role::Adversary => -adversary_to_target,
                    _ => {
                        let closest = self
                            .agents
                            .iter()
                            .zip(&self.roles)
                            .filter(|(_, &r)| r == Role::Good)
                            .map(|(a, _)| distance(a.position, target))
                            .fold(f64::INFINITY, f64::min);
                        -closest + adversary_to_target
                    }
                }
            }
        }
    }

    fn collision_pairs(&self) -> usize {
        let mut count = 0;
        for i in 0..self.agents.len() {
            for j in (i + 1)..self.agents.len() {
                let (a, b) = (&self.agents[i], &self.agents[j]);
                if distance(a.position, b.position) < a.radius + b.radius {
                    count += 1;
                }
            }
        }
        count
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_actions(world: &World) -> Vec<Vec<f64>> {
        world
            .action_dims()
            .into_iter()
            .map(|d| vec![0.0; d])
            .collect()
    }

    #[test]
    fn scenario_entity_counts() {
        let mut rng = Rng::new(1);
        let w = make_scenario(Scenario::CoopNavigation, &mut rng);
        assert_eq!((w.agents.len(), w.landmarks.len()), (3, 3));
        assert!(w.roles.iter().all(|&r| r == Role::Good));

        let w = make_scenario(Scenario::CoopCommunication, &mut rng);
        assert_eq!(w.roles, vec![Role::Speaker, Role::Listener]);
        assert_eq!(w.landmarks.len(), 3);

        let w = make_scenario(Scenario::KeepAway, &mut rng);
        assert_eq!(w.roles, vec![Role::Good, Role::Adversary]);
        assert_eq!(w.landmarks.len(), 2);

        let w = make_scenario(Scenario::PhysicalDeception, &mut rng);
        assert_eq!(w.roles.iter().filter(|&&r| r == Role::Good).count(), 2);
        assert_eq!(w.roles.iter().filter(|&&r| r == Role::Adversary).count(), 1);
        assert_eq!(w.landmarks.len(), 2);
        assert_eq!(w.landmarks[w.target].color, Color::Green);
    }

    #[test]
    fn unknown_scenario_is_rejected() {
        assert!(matches!("push".parse::<Scenario>(), Err(Error::Config(_))));
        assert_eq!("keep_away".parse::<Scenario>().unwrap(), Scenario::KeepAway);
    }

    #[test]
    fn zero_action_at_rest_is_an_equilibrium() {
        let mut rng = Rng::new(2);
        let mut w = make_scenario(Scenario::CoopNavigation, &mut rng);
        // Spread agents so that no contacts fire.
        w.agents[0].position = [-0.8, 0.0];
        w.agents[1].position = [0.0, 0.0];
        w.agents[2].position = [0.8, 0.0];
        let before = w.agents.clone();
        let a = zero_actions(&w);
        w.step(&a).unwrap();
        assert_eq!(w.agents, before);
    }

    #[test]
    fn unit_force_from_rest() {
        let mut rng = Rng::new(3);
        let mut w = make_scenario(Scenario::KeepAway, &mut rng);
        w.agents[0].position = [0.0, 0.0];
        w.agents[1].position = [0.9, 0.9];
        w.step(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let dt = w.physics.dt;
        assert_eq!(w.agents[0].velocity, [dt, 0.0]);
        assert_eq!(w.agents[0].position, [dt * dt, 0.0]);
    }

    #[test]
    fn full_damping_forgets_velocity() {
        let mut rng = Rng::new(3);
        let mut w = make_scenario(Scenario::KeepAway, &mut rng);
        w.physics.damping = 1.0;
        w.agents[0].velocity = [5.0, -3.0];
        w.agents[0].position = [0.0, 0.0];
        w.agents[1].position = [0.9, 0.9];
        w.integrate_physics(&[[0.5, 0.25], [0.0, 0.0]]);
        assert_eq!(
            w.agents[0].velocity,
            [0.5 * w.physics.dt, 0.25 * w.physics.dt]
        );
    }

    #[test]
    fn overlapping_agents_push_apart_symmetrically() {
        let mut rng = Rng::new(4);
        let mut w = make_scenario(Scenario::CoopNavigation, &mut rng);
        w.agents[0].position = [-0.03, 0.0];
        w.agents[1].position = [0.03, 0.0];
        w.agents[2].position = [0.9, 0.9];
        w.integrate_physics(&[[0.0; 2]; 3]);
        let (v0, v1) = (w.agents[0].velocity, w.agents[1].velocity);
        assert!(v0[0] < 0.0 && v1[0] > 0.0);
        assert_eq!(v0[0], -v1[0]);
        assert_eq!(v0[1] + v1[1], 0.0);
    }

    #[test]
    fn landmarks_never_move() {
        let mut rng = Rng::new(5);
        for scenario in Scenario::ALL {
            let mut w = make_scenario(scenario, &mut rng);
            let landmarks = w.landmarks.clone();
            while !w.is_done() {
                let a: Vec<Vec<f64>> = w
                    .action_dims()
                    .into_iter()
                    .map(|d| (0..d).map(|_| rng.uniform(-1.5, 1.5)).collect())
                    .collect();
                w.step(&a).unwrap();
            }
            assert_eq!(w.landmarks, landmarks);
            assert!(w.clipped_actions > 0);
        }
    }

    #[test]
    fn step_after_done_and_bad_dims_are_errors() {
        let mut rng = Rng::new(6);
        let mut w = make_scenario(Scenario::CoopCommunication, &mut rng).with_max_steps(1);
        assert!(matches!(
            w.step(&[vec![0.0; 2], vec![0.0; 2]]),
            Err(Error::Config(_))
        ));
        let out = w.step(&[vec![0.0; 3], vec![0.0; 2]]).unwrap();
        assert!(out.done);
        assert!(matches!(
            w.step(&[vec![0.0; 3], vec![0.0; 2]]),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn listener_hears_the_message_verbatim() {
        let mut rng = Rng::new(7);
        let mut w = make_scenario(Scenario::CoopCommunication, &mut rng);
        let msg = vec![0.25, -0.5, 0.75];
        let out = w.step(&[msg.clone(), vec![0.0, 0.0]]).unwrap();
        let listener = &out.observations[1];
        assert_eq!(&listener[listener.len() - 3..], msg.as_slice());
        let speaker = &out.observations[0];
        assert_eq!(speaker.len(), 3);
        assert_eq!(speaker[w.target], 1.0);
    }

    #[test]
    fn adversaries_do_not_see_the_target() {
        let mut rng = Rng::new(8);
        let mut w = make_scenario(Scenario::KeepAway, &mut rng);
        w.target = 0;
        let obs0 = w.observe(1);
        w.target = 1;
        assert_eq!(w.observe(1), obs0);
        assert_ne!(w.observe(0), {
            w.target = 0;
            w.observe(0)
        });

        let mut w = make_scenario(Scenario::PhysicalDeception, &mut rng);
        w.target = 0;
        let obs0 = w.observe(2);
        w.target = 1;
        assert_eq!(w.observe(2), obs0);
    }

    #[test]
    fn agent_on_landmark_sees_zero_offset() {
        let mut rng = Rng::new(9);
        let mut w = make_scenario(Scenario::CoopNavigation, &mut rng);
        w.agents[0].position = w.landmarks[1].position;
        let obs = w.observe(0);
        assert_eq!(&obs[6..8], &[0.0, 0.0]);
    }

    #[test]
    fn reward_spot_checks() {
        let mut rng = Rng::new(10);
        let mut w = make_scenario(Scenario::CoopNavigation, &mut rng);
        w.landmarks[0].position = [-0.5, 0.0];
        w.landmarks[1].position = [0.0, 0.5];
        w.landmarks[2].position = [0.5, 0.0];
        for k in 0..3 {
            w.agents[k].position = w.landmarks[k].position;
        }
        assert!((0..3).all(|i| w.reward(i) == 0.0));

        let mut w = make_scenario(Scenario::CoopCommunication, &mut rng);
        let t = w.landmarks[w.target].position;
        w.agents[1].position = t;
        assert_eq!(w.reward(0), 0.0);
        assert_eq!(w.reward(1), 0.0);
        w.agents[1].position = [t[0] + 1.0, t[1]];
        assert_eq!(w.reward(1), -1.0);
        assert_eq!(w.reward(0), w.reward(1));

        let mut w = make_scenario(Scenario::PhysicalDeception, &mut rng);
        w.target = 0;
        w.landmarks[0].position = [0.0, 0.0];
        w.landmarks[1].position = [0.6, 0.0];
        w.agents[0].position = [0.0, 0.0];
        w.agents[1].position = [-0.7, -0.7];
        w.agents[2].position = [0.6, 0.0];
        assert!((w.reward(0) - 0.6).abs() < 1e-15);
        assert_eq!(w.reward(0), w.reward(1));
        assert!((w.reward(2) + 0.6).abs() < 1e-15);
    }

    #[test]
    fn keep_away_distance_term_has_opposite_signs() {
        let mut rng = Rng::new(11);
        let mut w = make_scenario(Scenario::KeepAway, &mut rng);
        let t = w.landmarks[w.target].position;
        w.agents[1].position = w.agents[0].position;
        let d = distance(w.agents[0].position, t);
        assert!((w.reward(0) + d).abs() < 1e-15);
        assert!((w.reward(1) - d).abs() < 1e-15);
    }
}
