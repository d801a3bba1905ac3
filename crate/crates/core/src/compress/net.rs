//! Minimal dense network with Adam, used by the autoencoders.

use ndarray::{Array1, Array2, Axis};
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Tanh,
    Linear,
}

impl Activation {
    fn apply(self, z: &mut Array2<f64>) {
        if self == Activation::Tanh {
            z.mapv_inplace(f64::tanh);
        }
    }

    /// Derivative expressed through the activation output.
    fn grad_from_output(self, a: &Array2<f64>) -> Array2<f64> {
        match self {
            Activation::Tanh => a.mapv(|v| 1.0 - v * v),
            Activation::Linear => Array2::ones(a.raw_dim()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dense {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
}

impl Dense {
    pub fn new(input: usize, output: usize, activation: Activation, rng: &mut Rng) -> Self {
        let limit = (6.0 / (input + output) as f64).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit).expect("finite bounds");
        Self {
            weights: Array2::from_shape_simple_fn((input, output), || dist.sample(rng)),
            bias: Array1::zeros(output),
            activation,
        }
    }

    pub fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut z = x.dot(&self.weights) + &self.bias;
        self.activation.apply(&mut z);
        z
    }
}

/// Adam state for one parameter tensor.
#[derive(Debug, Clone)]
pub struct AdamSlot<D: ndarray::Dimension> {
    m: ndarray::Array<f64, D>,
    v: ndarray::Array<f64, D>,
}

#[derive(Debug, Clone, Copy)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub t: i32,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
        }
    }

    pub fn slot<D: ndarray::Dimension>(like: &ndarray::Array<f64, D>) -> AdamSlot<D> {
        AdamSlot {
            m: ndarray::Array::zeros(like.raw_dim()),
            v: ndarray::Array::zeros(like.raw_dim()),
        }
    }

    /// Advance the step counter; call once per batch before `update`.
    pub fn tick(&mut self) {
        self.t += 1;
    }

    pub fn update<D: ndarray::Dimension>(
        &self,
        param: &mut ndarray::Array<f64, D>,
        grad: &ndarray::Array<f64, D>,
        slot: &mut AdamSlot<D>,
    ) {
        let (b1, b2) = (self.beta1, self.beta2);
        slot.m.zip_mut_with(grad, |m, &g| *m = b1 * *m + (1.0 - b1) * g);
        slot.v.zip_mut_with(grad, |v, &g| *v = b2 * *v + (1.0 - b2) * g * g);
        let c1 = 1.0 - b1.powi(self.t);
        let c2 = 1.0 - b2.powi(self.t);
        let step = self.lr;
        let eps = self.eps;
        ndarray::Zip::from(param)
            .and(&slot.m)
            .and(&slot.v)
            .for_each(|p, &m, &v| *p -= step * (m / c1) / ((v / c2).sqrt() + eps));
    }
}

/// Weight and bias gradients of one layer.
pub type LayerGrad = (Array2<f64>, Array1<f64>);

/// Feed-forward stack trained on squared error.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Network {
    pub layers: Vec<Dense>,
}

impl Network {
    /// Activations of every layer, input first.
    pub fn forward_all(&self, x: &Array2<f64>) -> Vec<Array2<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.clone());
        for layer in &self.layers {
            let next = layer.forward(acts.last().expect("non-empty"));
            acts.push(next);
        }
        acts
    }

    pub fn forward_until(&self, x: &Array2<f64>, n_layers: usize) -> Array2<f64> {
        self.layers[..n_layers]
            .iter()
            .fold(x.clone(), |a, layer| layer.forward(&a))
    }

    /// Gradients of mean squared error against `target`.
    pub fn mse_gradients(
        &self,
        x: &Array2<f64>,
        target: &Array2<f64>,
    ) -> (f64, Vec<LayerGrad>) {
        let acts = self.forward_all(x);
        let out = acts.last().expect("non-empty");
        let diff = out - target;
        let count = diff.len() as f64;
        let loss = diff.iter().map(|d| d * d).sum::<f64>() / count;
        let mut delta = diff * (2.0 / count);
        let mut grads = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate().rev() {
            delta = delta * layer.activation.grad_from_output(&acts[i + 1]);
            let gw = acts[i].t().dot(&delta);
            let gb = delta.sum_axis(Axis(0));
            grads.push((gw, gb));
            if i > 0 {
                delta = delta.dot(&layer.weights.t());
            }
        }
        grads.reverse();
        (loss, grads)
    }
}
