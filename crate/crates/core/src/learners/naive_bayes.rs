use serde::{Deserialize, Serialize};

use super::Fitted;
use crate::data::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNbParams {
    /// Fraction of the largest feature variance added to every variance.
    pub var_smoothing: f64,
}

impl Default for GaussianNbParams {
    fn default() -> Self {
        Self { var_smoothing: 1e-9 }
    }
}

pub(crate) struct GaussianNb {
    log_prior: Vec<f64>,
    mean: Vec<Vec<f64>>,
    var: Vec<Vec<f64>>,
}

impl GaussianNb {
    pub fn fit(x: &FeatureMatrix, y: &[usize], class_count: usize, params: &GaussianNbParams) -> Self {
        let d = x.cols();
        let mut count = vec![0.0; class_count];
        let mut mean = vec![vec![0.0; d]; class_count];
        for (r, &c) in y.iter().enumerate() {
            count[c] += 1.0;
            for (m, v) in mean[c].iter_mut().zip(x.row(r)) {
                *m += v;
            }
        }
        for (m, &n) in mean.iter_mut().zip(&count) {
            if n > 0.0 {
                m.iter_mut().for_each(|v| *v /= n);
            }
        }
        let mut var = vec![vec![0.0; d]; class_count];
        for (r, &c) in y.iter().enumerate() {
            for ((s, v), m) in var[c].iter_mut().zip(x.row(r)).zip(&mean[c]) {
                *s += (v - m) * (v - m);
            }
        }
        for (s, &n) in var.iter_mut().zip(&count) {
            if n > 0.0 {
                s.iter_mut().for_each(|v| *v /= n);
            }
        }
        let max_var = (0..d)
            .map(|j| crate::stats::variance(&x.column(j)))
            .fold(0.0, f64::max);
        let eps = (params.var_smoothing * max_var).max(1e-12);
        var.iter_mut().flatten().for_each(|v| *v += eps);
        let n: f64 = count.iter().sum();
        // classes absent from this training split get zero prior mass
        let log_prior = count
            .iter()
            .map(|&c| if c > 0.0 { (c / n).ln() } else { f64::NEG_INFINITY })
            .collect();
        Self {
            log_prior,
            mean,
            var,
        }
    }
}

impl Fitted for GaussianNb {
    fn predict(&self, x: &FeatureMatrix) -> Vec<f64> {
        let k = self.log_prior.len();
        let mut out = Vec::with_capacity(x.rows() * k);
        let mut jll = vec![0.0; k];
        for r in 0..x.rows() {
            let row = x.row(r);
            for (c, slot) in jll.iter_mut().enumerate() {
                let mut ll = self.log_prior[c];
                for ((v, m), s) in row.iter().zip(&self.mean[c]).zip(&self.var[c]) {
                    ll -= 0.5 * ((2.0 * std::f64::consts::PI * s).ln() + (v - m) * (v - m) / s);
                }
                *slot = ll;
            }
            let max = jll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let s: f64 = jll.iter().map(|l| (l - max).exp()).sum();
            out.extend(jll.iter().map(|l| (l - max).exp() / s));
        }
        out
    }
}
