//! Versioned binary checkpoints of a [`Trainer`].
//!
//! Layout (all integers and reals little-endian):
//!
//! ```text
//! magic "CLMADDPG" | u32 version | u32 agent count
//! per agent:
//!   u32 active member | u64 window pushes | u32 K
//!   K x (actor net, target actor net, actor optimizer)
//!   critic net | target critic net | critic optimizer
//!   marginal: f64 alpha, u8 present, [u32 dim, dim x f64 mean, dim x f64 variance]
//!   window: u32 capacity, u32 len, u32 dim, len x dim x f64
//! rng states: env, sample, then per agent noise and ensemble
//!   (u64 seed, u64 stream, u128 word position)
//! u64 episodes done | u64 env steps | u64 update rounds
//!
//! net:       u32 layers, per layer u32 in, u32 out, u8 activation, weights (row-major), bias
//! optimizer: f64 lr, f64 beta1, f64 beta2, f64 eps, u64 step, then per layer m_w, v_w, m_b, v_b
//! ```
//!
//! The replay buffer is not included.

use ndarray::{Array1, Array2};

use crate::gaussian_stats::{ActionWindow, DiagGaussian, MarginalEstimate};
use crate::numerics::{Activation, AdamConfig, DenseNet, Layer, OptimizerState, Rng, RngState};
use crate::{Error, Result};

use super::agent::Agent;
use super::train::Trainer;

const MAGIC: &[u8; 8] = b"CLMADDPG";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Default)]
struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: usize) {
        self.buf.extend_from_slice(&(v as u32).to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn reals<'a>(&mut self, vs: impl IntoIterator<Item = &'a f64>) {
        for &v in vs {
            self.f64(v);
        }
    }

    fn net(&mut self, net: &DenseNet) {
        self.u32(net.layers().len());
        for l in net.layers() {
            self.u32(l.in_dim());
            self.u32(l.out_dim());
            self.u8(l.activation.tag());
            self.reals(l.weights.iter());
            self.reals(l.bias.iter());
        }
    }

    fn optimizer(&mut self, opt: &OptimizerState) {
        let c = opt.config;
        for v in [c.learning_rate, c.beta1, c.beta2, c.epsilon] {
            self.f64(v);
        }
        self.u64(opt.step);
        for k in 0..opt.m_weights.len() {
            self.reals(opt.m_weights[k].iter());
            self.reals(opt.v_weights[k].iter());
            self.reals(opt.m_bias[k].iter());
            self.reals(opt.v_bias[k].iter());
        }
    }

    fn rng(&mut self, rng: &Rng) {
        let s = rng.state();
        self.u64(s.seed);
        self.u64(s.stream);
        self.buf.extend_from_slice(&s.word_pos.to_le_bytes());
    }
}

struct Decoder<'a> {
    rest: &'a [u8],
}

impl<'a> Decoder<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.rest.len() < n {
            return Err(Error::Checkpoint("unexpected end of data".into()));
        }
        let (head, tail) = self.rest.split_at(n);
        self.rest = tail;
        Ok(head)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }
    fn reals(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }
    fn matrix(&mut self, rows: usize, cols: usize) -> Result<Array2<f64>> {
        Ok(Array2::from_shape_vec((rows, cols), self.reals(rows * cols)?).expect("sized"))
    }

    fn net(&mut self) -> Result<DenseNet> {
        let count = self.u32()?;
        let mut layers = Vec::with_capacity(count);
        for _ in 0..count {
            let (inp, out) = (self.u32()?, self.u32()?);
            let tag = self.u8()?;
            let act = Activation::from_tag(tag)
                .ok_or_else(|| Error::Checkpoint(format!("unknown activation tag {tag}")))?;
            let weights = self.matrix(out, inp)?;
            let bias = Array1::from(self.reals(out)?);
            layers.push(Layer::new(weights, bias, act)?);
        }
        DenseNet::from_layers(layers)
    }

    fn optimizer(&mut self, net: &DenseNet) -> Result<OptimizerState> {
        let config = AdamConfig {
            learning_rate: self.f64()?,
            beta1: self.f64()?,
            beta2: self.f64()?,
            epsilon: self.f64()?,
        };
        let mut opt = OptimizerState::new(net, config);
        opt.step = self.u64()?;
        for (k, l) in net.layers().iter().enumerate() {
            let (o, i) = l.weights.dim();
            opt.m_weights[k] = self.matrix(o, i)?;
            opt.v_weights[k] = self.matrix(o, i)?;
            opt.m_bias[k] = Array1::from(self.reals(o)?);
            opt.v_bias[k] = Array1::from(self.reals(o)?);
        }
        Ok(opt)
    }

    fn rng(&mut self) -> Result<Rng> {
        let seed = self.u64()?;
        let stream = self.u64()?;
        let word_pos = u128::from_le_bytes(self.take(16)?.try_into().expect("16 bytes"));
        Ok(Rng::from_state(RngState {
            seed,
            stream,
            word_pos,
        }))
    }
}

fn encode_agent(e: &mut Encoder, a: &Agent) {
    e.u32(a.active);
    e.u64(a.window_pushes);
    e.u32(a.actors.len());
    for k in 0..a.actors.len() {
        e.net(&a.actors[k]);
        e.net(&a.target_actors[k]);
        e.optimizer(&a.actor_optimizers[k]);
    }
    e.net(&a.critic);
    e.net(&a.target_critic);
    e.optimizer(&a.critic_optimizer);

    e.f64(a.marginal.alpha());
    match a.marginal.gaussian() {
        Some(g) => {
            e.u8(1);
            e.u32(g.dim());
            e.reals(g.mean());
            e.reals(g.variance());
        }
        None => e.u8(0),
    }

    e.u32(a.window.capacity());
    e.u32(a.window.len());
    e.u32(a.window.iter().next().map_or(0, <[f64]>::len));
    for action in a.window.iter() {
        e.reals(action);
    }
}

fn decode_agent(d: &mut Decoder, template: &Agent) -> Result<Agent> {
    let mut a = template.clone();
    a.active = d.u32()?;
    a.window_pushes = d.u64()?;
    let k = d.u32()?;
    if k != template.actors.len() || a.active >= k {
        return Err(Error::Checkpoint(format!(
            "ensemble size {k} / active {} does not match",
            a.active
        )));
    }
    for m in 0..k {
        a.actors[m] = d.net()?;
        a.target_actors[m] = d.net()?;
        a.actor_optimizers[m] = d.optimizer(&a.actors[m])?;
        if !a.actors[m].same_shape(&template.actors[m]) {
            return Err(Error::Checkpoint(
                "actor shape does not match the configured network".into(),
            ));
        }
    }
    a.critic = d.net()?;
    a.target_critic = d.net()?;
    a.critic_optimizer = d.optimizer(&a.critic)?;
    if !a.critic.same_shape(&template.critic) {
        return Err(Error::Checkpoint(
            "critic shape does not match the configured network".into(),
        ));
    }

    let alpha = d.f64()?;
    a.marginal = if d.u8()? == 1 {
        let dim = d.u32()?;
        let mean = d.reals(dim)?;
        let var = d.reals(dim)?;
        MarginalEstimate::with_initial(alpha, DiagGaussian::new(mean, var)?)?
    } else {
        MarginalEstimate::new(alpha)?
    };

    let capacity = d.u32()?;
    let len = d.u32()?;
    let dim = d.u32()?;
    a.window = ActionWindow::new(capacity.max(1));
    for _ in 0..len {
        a.window.push(&d.reals(dim)?);
    }
    Ok(a)
}

impl Trainer {
    pub fn save_checkpoint(&self) -> Vec<u8> {
        let mut e = Encoder::default();
        e.buf.extend_from_slice(MAGIC);
        e.u32(CHECKPOINT_VERSION as usize);
        e.u32(self.agents.len());
        for a in &self.agents {
            encode_agent(&mut e, a);
        }
        e.rng(&self.env_rng);
        e.rng(&self.sample_rng);
        for (noise, ensemble) in self.noise_rngs.iter().zip(&self.ensemble_rngs) {
            e.rng(noise);
            e.rng(ensemble);
        }
        e.u64(self.episode as u64);
        e.u64(self.env_steps);
        e.u64(self.update_rounds);
        e.buf
    }

    /// Restores state saved by [`Trainer::save_checkpoint`] into a trainer
    /// built with the same scenario and configuration.
    pub fn load_checkpoint(&mut self, bytes: &[u8]) -> Result<()> {
        let mut d = Decoder { rest: bytes };
        if d.take(8)? != MAGIC {
            return Err(Error::Checkpoint("missing magic header".into()));
        }
        let version = d.u32()?;
        if version != CHECKPOINT_VERSION as usize {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let n = d.u32()?;
        if n != self.agents.len() {
            return Err(Error::Checkpoint(format!(
                "checkpoint has {n} agents, trainer has {}",
                self.agents.len()
            )));
        }
        let agents = self
            .agents
            .iter()
            .map(|t| decode_agent(&mut d, t))
            .collect::<Result<Vec<_>>>()?;
        let env_rng = d.rng()?;
        let sample_rng = d.rng()?;
        let mut noise_rngs = Vec::with_capacity(n);
        let mut ensemble_rngs = Vec::with_capacity(n);
        for _ in 0..n {
            noise_rngs.push(d.rng()?);
            ensemble_rngs.push(d.rng()?);
        }
        let episode = d.u64()? as usize;
        let env_steps = d.u64()?;
        let update_rounds = d.u64()?;
        if !d.rest.is_empty() {
            return Err(Error::Checkpoint(format!(
                "{} trailing bytes",
                d.rest.len()
            )));
        }

        self.agents = agents;
        self.env_rng = env_rng;
        self.sample_rng = sample_rng;
        self.noise_rngs = noise_rngs;
        self.ensemble_rngs = ensemble_rngs;
        self.episode = episode;
        self.env_steps = env_steps;
        self.update_rounds = update_rounds;
        Ok(())
    }
}
