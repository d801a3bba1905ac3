use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::scale::Standardizer;
use super::Fitted;
use crate::data::FeatureMatrix;

/// Multinomial logistic regression trained by full-batch gradient descent on
/// standardized inputs with an L2 penalty of `1 / (2 C n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub c: f64,
    pub max_iter: usize,
    pub learning_rate: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            max_iter: 300,
            learning_rate: 0.5,
        }
    }
}

pub(crate) struct Logistic {
    scaler: Standardizer,
    weights: Array2<f64>,
    bias: Array1<f64>,
}

pub(crate) fn softmax_rows(z: &mut Array2<f64>) {
    for mut row in z.rows_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
}

pub(crate) fn one_hot(y: &[usize], class_count: usize) -> Array2<f64> {
    let mut t = Array2::zeros((y.len(), class_count));
    for (i, &c) in y.iter().enumerate() {
        t[[i, c]] = 1.0;
    }
    t
}

impl Logistic {
    pub fn fit(x: &FeatureMatrix, y: &[usize], class_count: usize, params: &LogisticParams) -> Self {
        let scaler = Standardizer::fit(x);
        let xs = scaler.transform(x);
        let n = xs.nrows() as f64;
        let target = one_hot(y, class_count);
        let l2 = 1.0 / (params.c * n);
        let mut weights = Array2::<f64>::zeros((xs.ncols(), class_count));
        let mut bias = Array1::<f64>::zeros(class_count);
        for _ in 0..params.max_iter {
            let mut p = xs.dot(&weights) + &bias;
            softmax_rows(&mut p);
            let err = (p - &target) / n;
            let grad_w = xs.t().dot(&err) + &weights * l2;
            let grad_b = err.sum_axis(Axis(0));
            weights.scaled_add(-params.learning_rate, &grad_w);
            bias.scaled_add(-params.learning_rate, &grad_b);
        }
        Self {
            scaler,
            weights,
            bias,
        }
    }
}

impl Fitted for Logistic {
    fn predict(&self, x: &FeatureMatrix) -> Vec<f64> {
        let mut p = self.scaler.transform(x).dot(&self.weights) + &self.bias;
        softmax_rows(&mut p);
        p.into_raw_vec_and_offset().0
    }
}
