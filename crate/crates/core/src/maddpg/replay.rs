use ndarray::{s, Array2, ArrayView2};

use crate::numerics::Rng;
use crate::{Error, Result};

/// Where each agent's block sits inside the joint observation and joint action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub obs_dims: Vec<usize>,
    pub act_dims: Vec<usize>,
    obs_offsets: Vec<usize>,
    act_offsets: Vec<usize>,
}

fn offsets(dims: &[usize]) -> Vec<usize> {
    dims.iter()
        .scan(0, |acc, &d| {
            let start = *acc;
            *acc += d;
            Some(start)
        })
        .collect()
}

impl Layout {
    pub fn new(obs_dims: Vec<usize>, act_dims: Vec<usize>) -> Self {
        assert_eq!(
            obs_dims.len(),
            act_dims.len(),
            "one observation and one action block per agent"
        );
        Self {
            obs_offsets: offsets(&obs_dims),
            act_offsets: offsets(&act_dims),
            obs_dims,
            act_dims,
        }
    }

    pub fn num_agents(&self) -> usize {
        self.obs_dims.len()
    }

    pub fn joint_obs_dim(&self) -> usize {
        self.obs_dims.iter().sum()
    }

    pub fn joint_act_dim(&self) -> usize {
        self.act_dims.iter().sum()
    }

    /// Critic input width: joint observation followed by joint action.
    pub fn critic_in_dim(&self) -> usize {
        self.joint_obs_dim() + self.joint_act_dim()
    }

    pub fn obs_range(&self, agent: usize) -> std::ops::Range<usize> {
        self.obs_offsets[agent]..self.obs_offsets[agent] + self.obs_dims[agent]
    }

    pub fn act_range(&self, agent: usize) -> std::ops::Range<usize> {
        self.act_offsets[agent]..self.act_offsets[agent] + self.act_dims[agent]
    }
}

/// `(x, a, r, x')` for all agents at once.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub actions: Vec<f64>,
    pub rewards: Vec<f64>,
    pub next_obs: Vec<f64>,
}

/// A sampled minibatch, one transition per row.
#[derive(Clone, Debug)]
pub struct Minibatch {
    pub obs: Array2<f64>,
    pub actions: Array2<f64>,
    pub rewards: Array2<f64>,
    pub next_obs: Array2<f64>,
}

impl Minibatch {
    pub fn len(&self) -> usize {
        self.obs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.obs.nrows() == 0
    }

    /// Agent `i`'s own action columns.
    pub fn agent_actions(&self, layout: &Layout, agent: usize) -> ArrayView2<'_, f64> {
        self.actions.slice(s![.., layout.act_range(agent)])
    }

    pub fn from_transitions(transitions: &[Transition]) -> Result<Self> {
        let first = transitions
            .first()
            .ok_or_else(|| Error::Usage("minibatch needs at least one transition".into()))?;
        let stack = |f: fn(&Transition) -> &Vec<f64>, width: usize| -> Result<Array2<f64>> {
            let flat: Vec<f64> = transitions
                .iter()
                .flat_map(|t| f(t).iter().copied())
                .collect();
            Array2::from_shape_vec((transitions.len(), width), flat)
                .map_err(|_| Error::Config("transitions differ in shape".into()))
        };
        Ok(Self {
            obs: stack(|t| &t.obs, first.obs.len())?,
            actions: stack(|t| &t.actions, first.actions.len())?,
            rewards: stack(|t| &t.rewards, first.rewards.len())?,
            next_obs: stack(|t| &t.next_obs, first.next_obs.len())?,
        })
    }
}

/// Fixed-capacity FIFO of transitions with uniform sampling.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    capacity: usize,
    records: Vec<Transition>,
    /// Slot overwritten by the next push once the buffer is full.
    next: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            records: Vec::new(),
            next: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, t: Transition) {
        if self.records.len() < self.capacity {
            self.records.push(t);
        } else {
            self.records[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    /// Stored transition by slot index (not by age).
    pub fn get(&self, index: usize) -> Option<&Transition> {
        self.records.get(index)
    }

    /// `size` slot indices drawn uniformly with replacement.
    pub fn sample_indices(&self, size: usize, rng: &mut Rng) -> Result<Vec<usize>> {
        if self.records.is_empty() {
            return Err(Error::Usage(
                "cannot sample from an empty replay buffer".into(),
            ));
        }
        Ok((0..size).map(|_| rng.index(self.records.len())).collect())
    }

    pub fn sample(&self, size: usize, rng: &mut Rng) -> Result<Minibatch> {
        let indices = self.sample_indices(size, rng)?;
        let first = &self.records[0];
        let gather = |f: fn(&Transition) -> &Vec<f64>, width: usize| {
            let mut out = Array2::zeros((size, width));
            for (mut row, &i) in out.rows_mut().into_iter().zip(&indices) {
                row.iter_mut()
                    .zip(f(&self.records[i]))
                    .for_each(|(o, &v)| *o = v);
            }
            out
        };
        Ok(Minibatch {
            obs: gather(|t| &t.obs, first.obs.len()),
            actions: gather(|t| &t.actions, first.actions.len()),
            rewards: gather(|t| &t.rewards, first.rewards.len()),
            next_obs: gather(|t| &t.next_obs, first.next_obs.len()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn transition(tag: f64) -> Transition {
        Transition {
            obs: vec![tag, tag],
            actions: vec![tag],
            rewards: vec![tag],
            next_obs: vec![tag + 1.0, tag + 1.0],
        }
    }

    #[test]
    fn layout_ranges() {
        let layout = Layout::new(vec![3, 4], vec![2, 3]);
        assert_eq!(layout.obs_range(1), 3..7);
        assert_eq!(layout.act_range(1), 2..5);
        assert_eq!(layout.critic_in_dim(), 12);
    }

    #[test]
    fn fifo_eviction() {
        let mut buf = ReplayBuffer::new(3);
        for k in 0..5 {
            buf.push(transition(k as f64));
        }
        assert_eq!(buf.len(), 3);
        let mut tags: Vec<f64> = (0..3).map(|i| buf.get(i).unwrap().obs[0]).collect();
        tags.sort_by(f64::total_cmp);
        assert_eq!(tags, vec![2.0, 3.0, 4.0]);
    }

    #[test]
    fn sampling_is_uniform() {
        let mut buf = ReplayBuffer::new(100);
        for k in 0..100 {
            buf.push(transition(k as f64));
        }
        let mut rng = Rng::new(42);
        let mut counts = [0usize; 100];
        for i in buf.sample_indices(100_000, &mut rng).unwrap() {
            counts[i] += 1;
        }
        assert!(
            counts.iter().all(|&c| (850..=1150).contains(&c)),
            "{counts:?}"
        );
    }

    #[test]
    fn minibatch_shapes() {
        let mut buf = ReplayBuffer::new(10);
        buf.push(transition(1.0));
        let mut rng = Rng::new(1);
        let b = buf.sample(4, &mut rng).unwrap();
        assert_eq!(b.obs.dim(), (4, 2));
        assert_eq!(b.actions.dim(), (4, 1));
        assert!(ReplayBuffer::new(2).sample(1, &mut rng).is_err());
    }
}
