use ndarray::{Array1, Array2, Axis};
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use super::linear::{one_hot, softmax_rows};
use super::scale::Standardizer;
use super::Fitted;
use crate::data::FeatureMatrix;
use crate::rng::Rng;

/// One tanh hidden layer with a softmax output, trained by full-batch
/// gradient descent with a fixed step for a fixed number of epochs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        Self {
            hidden: 32,
            epochs: 200,
            learning_rate: 0.5,
            l2: 1e-4,
        }
    }
}

pub(crate) struct Mlp {
    scaler: Standardizer,
    w1: Array2<f64>,
    b1: Array1<f64>,
    w2: Array2<f64>,
    b2: Array1<f64>,
}

/// Glorot-uniform initialisation.
pub(crate) fn glorot(rows: usize, cols: usize, rng: &mut Rng) -> Array2<f64> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let dist = Uniform::new_inclusive(-limit, limit).expect("finite bounds");
    Array2::from_shape_simple_fn((rows, cols), || dist.sample(rng))
}

impl Mlp {
    pub fn fit(
        x: &FeatureMatrix,
        y: &[usize],
        class_count: usize,
        params: &MlpParams,
        rng: &mut Rng,
    ) -> Self {
        let scaler = Standardizer::fit(x);
        let xs = scaler.transform(x);
        let n = xs.nrows() as f64;
        let target = one_hot(y, class_count);
        let mut w1 = glorot(xs.ncols(), params.hidden, rng);
        let mut b1 = Array1::zeros(params.hidden);
        let mut w2 = glorot(params.hidden, class_count, rng);
        let mut b2 = Array1::zeros(class_count);
        let lr = params.learning_rate;
        for _ in 0..params.epochs {
            let h = (xs.dot(&w1) + &b1).mapv(f64::tanh);
            let mut p = h.dot(&w2) + &b2;
            softmax_rows(&mut p);
            let d_out = (p - &target) / n;
            let g_w2 = h.t().dot(&d_out) + &w2 * params.l2;
            let g_b2 = d_out.sum_axis(Axis(0));
            let d_h = d_out.dot(&w2.t()) * h.mapv(|v| 1.0 - v * v);
            let g_w1 = xs.t().dot(&d_h) + &w1 * params.l2;
            let g_b1 = d_h.sum_axis(Axis(0));
            w2.scaled_add(-lr, &g_w2);
            b2.scaled_add(-lr, &g_b2);
            w1.scaled_add(-lr, &g_w1);
            b1.scaled_add(-lr, &g_b1);
        }
        Self {
            scaler,
            w1,
            b1,
            w2,
            b2,
        }
    }
}

impl Fitted for Mlp {
    fn predict(&self, x: &FeatureMatrix) -> Vec<f64> {
        let h = (self.scaler.transform(x).dot(&self.w1) + &self.b1).mapv(f64::tanh);
        let mut p = h.dot(&self.w2) + &self.b2;
        softmax_rows(&mut p);
        p.into_raw_vec_and_offset().0
    }
}
