//! Diagonal Gaussians and the policy mutual-information estimate.
//!
//! A deterministic policy has no per-state action distribution to take an
//! entropy of, so both entropies are approximated with fitted diagonal
//! Gaussians:
//!
//! - the marginal `pi(a)` is a running Gaussian, nudged each environment step
//!   towards the mean/variance of the agent's last 100 actions;
//! - the conditional `pi(a|s)` is the Gaussian fitted to the actions of the
//!   current training minibatch.
//!
//! Each entropy is the plug-in sum `-sum_{a in D} p(a) ln p(a)` over the
//! minibatch `D`, evaluated exactly as written: no `1/|D|` weighting and no
//! importance correction. That makes it a scale-dependent score rather than a
//! consistent entropy estimator, and the difference may come out negative.
//! Logs are natural, so results are in nats.

use std::collections::VecDeque;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use crate::{Error, Result};

/// Smallest variance any fitted Gaussian may carry.
pub const VARIANCE_FLOOR: f64 = 1e-6;

/// Default number of recent actions kept per agent.
pub const DEFAULT_WINDOW: usize = 100;

/// Default update rate of the running marginal.
pub const DEFAULT_ALPHA: f64 = 0.001;

const LN_2PI: f64 = 1.837_877_066_409_345_3;

#[derive(Clone, Debug, PartialEq)]
pub struct DiagGaussian {
    mean: Vec<f64>,
    variance: Vec<f64>,
}

impl DiagGaussian {
    /// Builds a Gaussian, raising every variance to at least [`VARIANCE_FLOOR`].
    pub fn new(mean: Vec<f64>, variance: Vec<f64>) -> Result<Self> {
        if mean.len() != variance.len() {
            return Err(Error::Config(format!(
                "mean has {} entries but variance has {}",
                mean.len(),
                variance.len()
            )));
        }
        let variance = variance.into_iter().map(floor_variance).collect();
        Ok(Self { mean, variance })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn variance(&self) -> &[f64] {
        &self.variance
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Log-density of a point, summed over independent dimensions.
    pub fn log_density(&self, point: ArrayView1<f64>) -> f64 {
        point
            .iter()
            .zip(self.mean.iter().zip(&self.variance))
            .map(|(&x, (&mu, &var))| {
                let d = x - mu;
                -0.5 * (LN_2PI + var.ln() + d * d / var)
            })
            .sum()
    }
}

fn floor_variance(v: f64) -> f64 {
    if v.is_nan() || v < VARIANCE_FLOOR {
        VARIANCE_FLOOR
    } else {
        v
    }
}

/// Per-dimension mean and population variance of a batch (one action per row).
pub fn batch_moments(batch: ArrayView2<f64>) -> Result<DiagGaussian> {
    if batch.nrows() == 0 {
        return Err(Error::Usage("batch moments of an empty batch".into()));
    }
    let n = batch.nrows() as f64;
    let mean = batch.sum_axis(Axis(0)) / n;
    let variance = batch
        .axis_iter(Axis(1))
        .zip(mean.iter())
        .map(|(col, &mu)| col.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / n)
        .collect();
    DiagGaussian::new(mean.to_vec(), variance)
}

/// Moments of a mixture of diagonal Gaussians:
/// `mu = sum p mu_s`, `var = sum p var_s + sum p mu_s^2 - mu^2`.
pub fn mixture_moments(
    weights: &[f64],
    means: &[Vec<f64>],
    variances: &[Vec<f64>],
) -> Result<DiagGaussian> {
    if weights.is_empty() || weights.len() != means.len() || weights.len() != variances.len() {
        return Err(Error::Usage(format!(
            "mixture needs matching nonempty lists, got {} weights, {} means, {} variances",
            weights.len(),
            means.len(),
            variances.len()
        )));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 || weights.iter().any(|&w| w < 0.0) {
        return Err(Error::Usage(format!(
            "mixture weights must form a distribution, sum is {total}"
        )));
    }
    let dim = means[0].len();
    if means.iter().chain(variances).any(|v| v.len() != dim) {
        return Err(Error::Usage(
            "mixture components differ in dimension".into(),
        ));
    }

    let mut mean = vec![0.0; dim];
    let mut variance = vec![0.0; dim];
    for d in 0..dim {
        let mut mu = 0.0;
        let mut second = 0.0;
        let mut within = 0.0;
        for ((&p, m), v) in weights.iter().zip(means).zip(variances) {
            mu += p * m[d];
            second += p * m[d] * m[d];
            within += p * v[d];
        }
        mean[d] = mu;
        variance[d] = within + second - mu * mu;
    }
    DiagGaussian::new(mean, variance)
}

/// Most recent actions of one agent, oldest evicted first.
#[derive(Clone, Debug)]
pub struct ActionWindow {
    actions: VecDeque<Vec<f64>>,
    capacity: usize,
}

impl ActionWindow {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "action window capacity must be positive");
        Self {
            actions: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn push(&mut self, action: &[f64]) {
        if self.actions.len() == self.capacity {
            self.actions.pop_front();
        }
        self.actions.push_back(action.to_vec());
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.actions.iter().map(Vec::as_slice)
    }

    /// Batch moments of the current contents; `None` until two actions are held.
    pub fn snapshot_moments(&self) -> Option<DiagGaussian> {
        if self.actions.len() < 2 {
            return None;
        }
        let dim = self.actions[0].len();
        let flat: Vec<f64> = self.actions.iter().flatten().copied().collect();
        let batch = Array2::from_shape_vec((self.actions.len(), dim), flat).ok()?;
        batch_moments(batch.view()).ok()
    }
}

/// Free-function form of [`ActionWindow::snapshot_moments`].
pub fn window_snapshot_moments(window: &ActionWindow) -> Option<DiagGaussian> {
    window.snapshot_moments()
}

/// Running diagonal-Gaussian estimate of the marginal action distribution.
#[derive(Clone, Debug)]
pub struct MarginalEstimate {
    alpha: f64,
    current: Option<DiagGaussian>,
}

impl MarginalEstimate {
    /// An estimate that adopts the first window snapshot it receives.
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Config(format!(
                "marginal update rate must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(Self {
            alpha,
            current: None,
        })
    }

    pub fn with_initial(alpha: f64, initial: DiagGaussian) -> Result<Self> {
        let mut est = Self::new(alpha)?;
        est.current = Some(initial);
        Ok(est)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gaussian(&self) -> Option<&DiagGaussian> {
        self.current.as_ref()
    }

    /// Blends in a new `(mu_n, sigma2_n)` observation:
    ///
    /// ```text
    /// mu'  = a mu_n + (1-a) mu
    /// var' = a var_n + (1-a) var + (a mu_n^2 + (1-a) mu^2) - (a mu_n + (1-a) mu)^2
    /// ```
    ///
    /// then floors the variance. The very first observation is adopted as-is.
    pub fn running_update(&mut self, mu_n: &[f64], sigma2_n: &[f64]) -> Result<()> {
        if mu_n.len() != sigma2_n.len() {
            return Err(Error::Config("mean and variance lengths differ".into()));
        }
        let Some(prev) = &self.current else {
            self.current = Some(DiagGaussian::new(mu_n.to_vec(), sigma2_n.to_vec())?);
            return Ok(());
        };
        if prev.dim() != mu_n.len() {
            return Err(Error::Config(format!(
                "marginal has dimension {}, update has {}",
                prev.dim(),
                mu_n.len()
            )));
        }
        let a = self.alpha;
        let b = 1.0 - a;
        let mut mean = Vec::with_capacity(mu_n.len());
        let mut variance = Vec::with_capacity(mu_n.len());
        for d in 0..mu_n.len() {
            let (m_old, v_old) = (prev.mean[d], prev.variance[d]);
            let blended = a * mu_n[d] + b * m_old;
            mean.push(blended);
            variance.push(
                a * sigma2_n[d] + b * v_old + (a * mu_n[d] * mu_n[d] + b * m_old * m_old)
                    - blended * blended,
            );
        }
        self.current = Some(DiagGaussian::new(mean, variance)?);
        Ok(())
    }

    pub fn update_from(&mut self, observed: &DiagGaussian) -> Result<()> {
        self.running_update(observed.mean(), observed.variance())
    }
}

/// `-sum_{a in batch} p(a) ln p(a)` with `p` the density of `g`.
///
/// Terms whose density underflows to zero contribute their limit, zero.
pub fn plugin_entropy(g: &DiagGaussian, batch: ArrayView2<f64>) -> Result<f64> {
    if batch.nrows() == 0 {
        return Err(Error::Usage("entropy of an empty batch".into()));
    }
    if batch.ncols() != g.dim() {
        return Err(Error::Config(format!(
            "batch actions have {} dimensions, Gaussian has {}",
            batch.ncols(),
            g.dim()
        )));
    }
    Ok(batch
        .outer_iter()
        .map(|a| {
            let log_p = g.log_density(a);
            let p = log_p.exp();
            if p == 0.0 {
                0.0
            } else {
                -p * log_p
            }
        })
        .sum())
}

/// `H(pi(a)) - H(pi(a|s))`: marginal entropy of the batch minus the entropy
/// under the batch's own fitted Gaussian. Not clamped; may be negative.
pub fn policy_mutual_information(marginal: &DiagGaussian, batch: ArrayView2<f64>) -> Result<f64> {
    let conditional = batch_moments(batch)?;
    Ok(plugin_entropy(marginal, batch)? - plugin_entropy(&conditional, batch)?)
}
