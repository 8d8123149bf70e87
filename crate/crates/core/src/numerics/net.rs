//! Fully connected networks with hand-written backpropagation.
//!
//! Batches are row-major: one sample per row. `forward_batch` caches every
//! layer's input and output so that a following `backward_batch` can
//! accumulate parameter gradients and hand back the gradient with respect to
//! the network input (the actor update needs `dQ/da`).

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};

use super::rng::Rng;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation output.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Tanh => 1,
            Activation::Identity => 2,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Activation::Relu),
            1 => Some(Activation::Tanh),
            2 => Some(Activation::Identity),
            _ => None,
        }
    }
}

/// One affine map followed by an elementwise nonlinearity.
#[derive(Clone, Debug)]
pub struct Layer {
    /// `out x in`
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
    pub grad_weights: Array2<f64>,
    pub grad_bias: Array1<f64>,
}

impl Layer {
    pub fn new(weights: Array2<f64>, bias: Array1<f64>, activation: Activation) -> Result<Self> {
        if weights.nrows() != bias.len() {
            return Err(Error::Config(format!(
                "bias length {} does not match {} output rows",
                bias.len(),
                weights.nrows()
            )));
        }
        let grad_weights = Array2::zeros(weights.raw_dim());
        let grad_bias = Array1::zeros(bias.len());
        Ok(Self {
            weights,
            bias,
            activation,
            grad_weights,
            grad_bias,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.nrows()
    }
}

#[derive(Clone, Debug, Default)]
struct Cache {
    /// `activations[0]` is the network input, `activations[k + 1]` the output of layer `k`.
    activations: Vec<Array2<f64>>,
}

#[derive(Clone, Debug)]
pub struct DenseNet {
    layers: Vec<Layer>,
    cache: Option<Cache>,
}

impl DenseNet {
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("a network needs at least one layer".into()));
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::Config(format!(
                    "layer {k} emits {} values but layer {} expects {}",
                    pair[0].out_dim(),
                    k + 1,
                    pair[1].in_dim()
                )));
            }
        }
        Ok(Self {
            layers,
            cache: None,
        })
    }

    /// Multi-layer perceptron with weights drawn uniformly from `±1/sqrt(fan_in)`.
    ///
    /// `sizes` lists every width including input and output; `hidden` is used
    /// between hidden layers and `output` on the last layer.
    pub fn mlp(
        sizes: &[usize],
        hidden: Activation,
        output: Activation,
        rng: &mut Rng,
    ) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Config(format!("invalid layer sizes {sizes:?}")));
        }
        let last = sizes.len() - 2;
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = 1.0 / (fan_in as f64).sqrt();
                let weights =
                    Array2::from_shape_simple_fn((fan_out, fan_in), || rng.uniform(-bound, bound));
                let bias = Array1::from_shape_simple_fn(fan_out, || rng.uniform(-bound, bound));
                let act = if k == last { output } else { hidden };
                Layer::new(weights, bias, act)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_layers(layers)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    /// Same layer shapes and activations.
    pub fn same_shape(&self, other: &DenseNet) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|(a, b)| a.weights.dim() == b.weights.dim() && a.activation == b.activation)
    }

    fn check_input(&self, cols: usize) -> Result<()> {
        if cols != self.in_dim() {
            return Err(Error::Config(format!(
                "network expects {} inputs, got {cols}",
                self.in_dim()
            )));
        }
        Ok(())
    }

    fn layer_forward(layer: &Layer, input: ArrayView2<f64>) -> Array2<f64> {
        let mut z = input.dot(&layer.weights.t());
        z += &layer.bias;
        let act = layer.activation;
        if act != Activation::Identity {
            z.mapv_inplace(|v| act.apply(v));
        }
        z
    }

    /// Batched forward pass that records activations for `backward_batch`.
    pub fn forward_batch(&mut self, input: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(input.ncols())?;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(input.to_owned());
        for layer in &self.layers {
            let next = Self::layer_forward(layer, activations[activations.len() - 1].view());
            activations.push(next);
        }
        let out = activations[activations.len() - 1].clone();
        self.cache = Some(Cache { activations });
        Ok(out)
    }

    /// Batched forward pass without touching the cache (target networks, evaluation).
    pub fn predict_batch(&self, input: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(input.ncols())?;
        let mut x = Self::layer_forward(&self.layers[0], input);
        for layer in &self.layers[1..] {
            x = Self::layer_forward(layer, x.view());
        }
        Ok(x)
    }

    pub fn forward(&mut self, input: &[f64]) -> Result<Vec<f64>> {
        let view = ArrayView2::from_shape((1, input.len()), input).expect("row view");
        Ok(self.forward_batch(view)?.into_raw_vec_and_offset().0)
    }

    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        let view = ArrayView2::from_shape((1, input.len()), input).expect("row view");
        Ok(self.predict_batch(view)?.into_raw_vec_and_offset().0)
    }

    /// Backpropagates `upstream` (dLoss/dOutput, one row per cached sample).
    ///
    /// Parameter gradients are summed over the batch and added to the
    /// gradient buffers. Returns dLoss/dInput.
    pub fn backward_batch(&mut self, upstream: ArrayView2<f64>) -> Result<Array2<f64>> {
        let cache = self.cache.as_ref().ok_or_else(|| {
            Error::Usage("backward called without a preceding forward pass".into())
        })?;
        let batch = cache.activations[0].nrows();
        if upstream.dim() != (batch, self.out_dim()) {
            return Err(Error::Config(format!(
                "upstream gradient has shape {:?}, expected ({batch}, {})",
                upstream.dim(),
                self.out_dim()
            )));
        }

        let mut grad = upstream.to_owned();
        for (k, layer) in self.layers.iter_mut().enumerate().rev() {
            let output = &cache.activations[k + 1];
            let input = &cache.activations[k];
            let act = layer.activation;
            if act != Activation::Identity {
                Zip::from(&mut grad)
                    .and(output)
                    .for_each(|g, &y| *g *= act.derivative_from_output(y));
            }
            layer.grad_weights += &grad.t().dot(input);
            layer.grad_bias += &grad.sum_axis(Axis(0));
            grad = grad.dot(&layer.weights);
        }
        Ok(grad)
    }

    pub fn backward(&mut self, upstream: &[f64]) -> Result<Vec<f64>> {
        let view = ArrayView2::from_shape((1, upstream.len()), upstream).expect("row view");
        Ok(self.backward_batch(view)?.into_raw_vec_and_offset().0)
    }

    pub fn zero_grad(&mut self) {
        for layer in &mut self.layers {
            layer.grad_weights.fill(0.0);
            layer.grad_bias.fill(0.0);
        }
    }

    pub fn grad_norm(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| {
                l.grad_weights.iter().map(|g| g * g).sum::<f64>()
                    + l.grad_bias.iter().map(|g| g * g).sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }

    /// All parameters flattened layer by layer (weights row-major, then bias).
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for layer in &self.layers {
            out.extend(layer.weights.iter());
            out.extend(layer.bias.iter());
        }
        out
    }

    /// Gradient buffers in the same order as [`DenseNet::parameters`].
    pub fn gradients(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for layer in &self.layers {
            out.extend(layer.grad_weights.iter());
            out.extend(layer.grad_bias.iter());
        }
        out
    }

    /// Overwrites parameters from a flat slice laid out like [`DenseNet::parameters`].
    pub fn set_parameters(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.num_params() {
            return Err(Error::Config(format!(
                "expected {} parameters, got {}",
                self.num_params(),
                values.len()
            )));
        }
        let mut rest = values;
        for layer in &mut self.layers {
            let (w, tail) = rest.split_at(layer.weights.len());
            layer.weights.iter_mut().zip(w).for_each(|(p, &v)| *p = v);
            let (b, tail) = tail.split_at(layer.bias.len());
            layer.bias.iter_mut().zip(b).for_each(|(p, &v)| *p = v);
            rest = tail;
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.layers.iter().all(|l| {
            l.weights.iter().all(|v| v.is_finite()) && l.bias.iter().all(|v| v.is_finite())
        })
    }
}

/// `target <- tau * source + (1 - tau) * target`, parameter by parameter.
pub fn soft_update(target: &mut DenseNet, source: &DenseNet, tau: f64) -> Result<()> {
    if !target.same_shape(source) {
        return Err(Error::Config(
            "soft update between networks of different shape".into(),
        ));
    }
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Config(format!("tau must lie in [0, 1], got {tau}")));
    }
    let keep = 1.0 - tau;
    for (t, s) in target.layers.iter_mut().zip(&source.layers) {
        Zip::from(&mut t.weights)
            .and(&s.weights)
            .for_each(|t, &s| *t = tau * s + keep * *t);
        Zip::from(&mut t.bias)
            .and(&s.bias)
            .for_each(|t, &s| *t = tau * s + keep * *t);
    }
    Ok(())
}
