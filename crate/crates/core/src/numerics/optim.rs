//! Adam optimizer state for a [`DenseNet`].

use ndarray::{Array1, Array2, Zip};

use super::net::DenseNet;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First and second moment accumulators mirroring a network's parameters.
#[derive(Clone, Debug)]
pub struct OptimizerState {
    pub config: AdamConfig,
    pub step: u64,
    pub m_weights: Vec<Array2<f64>>,
    pub v_weights: Vec<Array2<f64>>,
    pub m_bias: Vec<Array1<f64>>,
    pub v_bias: Vec<Array1<f64>>,
}

impl OptimizerState {
    pub fn new(net: &DenseNet, config: AdamConfig) -> Self {
        let zeros_w = || {
            net.layers()
                .iter()
                .map(|l| Array2::zeros(l.weights.raw_dim()))
                .collect()
        };
        let zeros_b = || {
            net.layers()
                .iter()
                .map(|l| Array1::zeros(l.bias.len()))
                .collect()
        };
        Self {
            config,
            step: 0,
            m_weights: zeros_w(),
            v_weights: zeros_w(),
            m_bias: zeros_b(),
            v_bias: zeros_b(),
        }
    }

    fn matches(&self, net: &DenseNet) -> bool {
        self.m_weights.len() == net.layers().len()
            && net
                .layers()
                .iter()
                .zip(&self.m_weights)
                .all(|(l, m)| l.weights.dim() == m.dim())
    }

    /// One bias-corrected Adam step from the accumulated gradients, which are
    /// zeroed afterwards.
    pub fn step(&mut self, net: &mut DenseNet) -> Result<()> {
        if !self.matches(net) {
            return Err(Error::Config(
                "optimizer state does not match network shape".into(),
            ));
        }
        let next_step = self.step + 1;
        for (k, layer) in net.layers().iter().enumerate() {
            let finite = layer.grad_weights.iter().all(|g| g.is_finite())
                && layer.grad_bias.iter().all(|g| g.is_finite());
            if !finite {
                return Err(Error::NonFinite(format!(
                    "gradient of layer {k} at optimizer step {next_step}"
                )));
            }
        }

        self.step = next_step;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.step as i32;
        let correction1 = 1.0 - beta1.powi(t);
        let correction2 = 1.0 - beta2.powi(t);
        let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / correction1;
            let v_hat = *v / correction2;
            *p -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        };

        for (k, layer) in net.layers_mut().iter_mut().enumerate() {
            Zip::from(&mut layer.weights)
                .and(&mut self.m_weights[k])
                .and(&mut self.v_weights[k])
                .and(&layer.grad_weights)
                .for_each(|p, m, v, &g| update(p, m, v, g));
            Zip::from(&mut layer.bias)
                .and(&mut self.m_bias[k])
                .and(&mut self.v_bias[k])
                .and(&layer.grad_bias)
                .for_each(|p, m, v, &g| update(p, m, v, g));
        }
        if !net.all_finite() {
            return Err(Error::NonFinite(format!(
                "parameters after optimizer step {}",
                self.step
            )));
        }
        net.zero_grad();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{Activation, Layer, Rng};
    use ndarray::array;

    fn scalar_net(w: f64) -> DenseNet {
        DenseNet::from_layers(vec![Layer::new(
            array![[w]],
            array![0.0],
            Activation::Identity,
        )
        .unwrap()])
        .unwrap()
    }

    #[test]
    fn zero_gradient_leaves_parameters_alone() {
        let mut rng = Rng::new(8);
        let mut net =
            DenseNet::mlp(&[3, 5, 2], Activation::Relu, Activation::Tanh, &mut rng).unwrap();
        let before = net.parameters();
        let mut state = OptimizerState::new(&net, AdamConfig::default());
        state.step(&mut net).unwrap();
        assert_eq!(net.parameters(), before);
        assert_eq!(state.step, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut net = scalar_net(1.0);
        net.layers_mut()[0].grad_weights[[0, 0]] = 1.0;
        let config = AdamConfig {
            learning_rate: 0.1,
            ..AdamConfig::default()
        };
        let mut state = OptimizerState::new(&net, config);
        state.step(&mut net).unwrap();
        // m_hat = 1, v_hat = 1 after bias correction.
        let expected = 1.0 - 0.1 * 1.0 / (1.0 + 1e-8);
        assert!((net.layers()[0].weights[[0, 0]] - expected).abs() < 1e-15);
        assert!((net.layers()[0].weights[[0, 0]] - 0.9).abs() < 1e-6);
        assert_eq!(net.layers()[0].grad_weights[[0, 0]], 0.0);
    }

    #[test]
    fn identical_inputs_give_identical_updates() {
        let mut rng = Rng::new(21);
        let mut a =
            DenseNet::mlp(&[2, 4, 1], Activation::Relu, Activation::Identity, &mut rng).unwrap();
        let mut b = a.clone();
        let mut sa = OptimizerState::new(&a, AdamConfig::default());
        let mut sb = OptimizerState::new(&b, AdamConfig::default());
        for _ in 0..5 {
            for net in [&mut a, &mut b] {
                net.forward(&[0.3, -0.2]).unwrap();
                net.backward(&[1.0]).unwrap();
            }
            sa.step(&mut a).unwrap();
            sb.step(&mut b).unwrap();
        }
        assert_eq!(a.parameters(), b.parameters());
    }

    #[test]
    fn nan_gradient_aborts_with_layer_and_step() {
        let mut net = scalar_net(1.0);
        net.layers_mut()[0].grad_bias[0] = f64::NAN;
        let mut state = OptimizerState::new(&net, AdamConfig::default());
        let err = state.step(&mut net).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("layer 0") && msg.contains("step 1"), "{msg}");
        assert_eq!(state.step, 0);
    }
}
