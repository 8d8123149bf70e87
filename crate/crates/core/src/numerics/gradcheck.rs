//! Central finite differences, used to check the hand-written backward pass.

use ndarray::Array2;

use super::net::DenseNet;
use crate::Result;

pub const DEFAULT_STEP: f64 = 1e-5;

/// `|a - b| / max(|a|, |b|, floor)`; the floor keeps near-zero pairs from
/// dominating the comparison.
pub fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(1e-6);
    (a - b).abs() / scale
}

/// Numerical gradient of `f` at `x`.
pub fn numerical_gradient(
    x: &[f64],
    h: f64,
    mut f: impl FnMut(&[f64]) -> Result<f64>,
) -> Result<Vec<f64>> {
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let orig = probe[i];
        probe[i] = orig + h;
        let plus = f(&probe)?;
        probe[i] = orig - h;
        let minus = f(&probe)?;
        probe[i] = orig;
        grad.push((plus - minus) / (2.0 * h));
    }
    Ok(grad)
}

/// Worst relative error between analytic and numerical gradients.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| relative_error(a, n))
        .fold(0.0, f64::max)
}

/// Result of checking one network on one batch under the loss
/// `L = sum(weights * output)`.
#[derive(Clone, Copy, Debug)]
pub struct GradCheck {
    pub param_error: f64,
    pub input_error: f64,
}

/// Compares backprop against finite differences for both parameters and inputs.
pub fn check_network(
    net: &DenseNet,
    input: &Array2<f64>,
    loss_weights: &Array2<f64>,
    h: f64,
) -> Result<GradCheck> {
    let loss = |n: &DenseNet, x: &Array2<f64>| -> Result<f64> {
        Ok((n.predict_batch(x.view())? * loss_weights).sum())
    };

    let mut work = net.clone();
    work.zero_grad();
    work.forward_batch(input.view())?;
    let input_grad = work.backward_batch(loss_weights.view())?;
    let analytic_params = work.gradients();

    let params = net.parameters();
    let mut probe = net.clone();
    let numeric_params = numerical_gradient(&params, h, |p| {
        probe.set_parameters(p)?;
        loss(&probe, input)
    })?;

    let shape = input.raw_dim();
    let flat_input: Vec<f64> = input.iter().copied().collect();
    let numeric_input = numerical_gradient(&flat_input, h, |x| {
        let x = Array2::from_shape_vec(shape, x.to_vec()).expect("same shape");
        loss(net, &x)
    })?;
    let analytic_input: Vec<f64> = input_grad.iter().copied().collect();

    Ok(GradCheck {
        param_error: max_relative_error(&analytic_params, &numeric_params),
        input_error: max_relative_error(&analytic_input, &numeric_input),
    })
}
