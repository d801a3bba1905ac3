//! AdaBoost (SAMME) over shallow trees, and gradient boosting with
//! log-loss Newton steps on regression trees.

use serde::{Deserialize, Serialize};

use super::tree::{ClassificationTree, RegressionTree, Table, TreeParams};
use super::Fitted;
use crate::data::FeatureMatrix;
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostParams {
    pub n_estimators: usize,
    pub learning_rate: f64,
    /// Depth of each weak learner; 1 gives decision stumps.
    pub max_depth: usize,
}

impl Default for AdaBoostParams {
    fn default() -> Self {
        Self {
            n_estimators: 50,
            learning_rate: 1.0,
            max_depth: 1,
        }
    }
}

pub(crate) struct AdaBoost {
    stages: Vec<(ClassificationTree, f64)>,
    class_count: usize,
}

impl AdaBoost {
    pub fn fit(
        x: &FeatureMatrix,
        y: &[usize],
        class_count: usize,
        params: &AdaBoostParams,
        rng: &mut Rng,
    ) -> Self {
        let n = x.rows();
        let k = class_count as f64;
        let table = Table {
            values: x.values(),
            n_features: x.cols(),
        };
        let rows: Vec<usize> = (0..n).collect();
        let tree_params = TreeParams {
            max_depth: Some(params.max_depth),
            ..TreeParams::default()
        };
        let mut w = vec![1.0 / n as f64; n];
        let mut stages = Vec::new();
        for _ in 0..params.n_estimators {
            let tree = ClassificationTree::fit(table, y, &w, &rows, class_count, tree_params, rng);
            let miss: Vec<bool> = (0..n).map(|i| tree.predict_class(x.row(i)) != y[i]).collect();
            let total: f64 = w.iter().sum();
            let err: f64 = w.iter().zip(&miss).filter(|(_, m)| **m).map(|(w, _)| w).sum::<f64>() / total;
            if err <= 0.0 {
                // perfect weak learner dominates the vote
                stages.push((tree, 1.0));
                break;
            }
            if err >= 1.0 - 1.0 / k {
                // no better than chance; SAMME stops here
                if stages.is_empty() {
                    stages.push((tree, 1.0));
                }
                break;
            }
            let alpha = params.learning_rate * (((1.0 - err) / err).ln() + (k - 1.0).ln());
            for (wi, m) in w.iter_mut().zip(&miss) {
                if *m {
                    *wi *= alpha.exp();
                }
            }
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|wi| *wi /= s);
            stages.push((tree, alpha));
        }
        Self {
            stages,
            class_count,
        }
    }
}

impl Fitted for AdaBoost {
    /// Softmax over the normalized weighted vote.
    fn predict(&self, x: &FeatureMatrix) -> Vec<f64> {
        let k = self.class_count;
        let alpha_sum: f64 = self.stages.iter().map(|(_, a)| a).sum();
        let mut out = vec![0.0; x.rows() * k];
        for (r, dst) in out.chunks_mut(k).enumerate() {
            for (tree, alpha) in &self.stages {
                dst[tree.predict_class(x.row(r))] += alpha / alpha_sum;
            }
            let scale = (k as f64 - 1.0).max(1.0);
            softmax_in_place(dst, scale);
        }
        out
    }
}

fn softmax_in_place(v: &mut [f64], temperature_inv: f64) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for x in v.iter_mut() {
        *x = ((*x - max) * temperature_inv).exp();
        s += *x;
    }
    v.iter_mut().for_each(|x| *x /= s);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoostingParams {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for GradientBoostingParams {
    fn default() -> Self {
        Self {
            n_estimators: 100,
            learning_rate: 0.1,
            max_depth: 3,
            min_samples_leaf: 1,
        }
    }
}

/// Binary tasks keep one logit; multi-class tasks keep one per class.
pub(crate) struct GradientBoosting {
    init: Vec<f64>,
    rounds: Vec<Vec<RegressionTree>>,
    learning_rate: f64,
    class_count: usize,
}

impl GradientBoosting {
    pub fn fit(x: &FeatureMatrix, y: &[usize], class_count: usize, params: &GradientBoostingParams) -> Self {
        let n = x.rows();
        let table = Table {
            values: x.values(),
            n_features: x.cols(),
        };
        let rows: Vec<usize> = (0..n).collect();
        let mut counts = vec![0.0; class_count];
        for &c in y {
            counts[c] += 1.0;
        }
        let eps = 1e-12;
        let binary = class_count == 2;
        let init: Vec<f64> = if binary {
            let p = (counts[1] / n as f64).clamp(eps, 1.0 - eps);
            vec![(p / (1.0 - p)).ln()]
        } else {
            counts.iter().map(|c| (c / n as f64).max(eps).ln()).collect()
        };
        let outputs = init.len();
        let mut raw: Vec<f64> = (0..n).flat_map(|_| init.iter().copied()).collect();
        let mut rounds = Vec::with_capacity(params.n_estimators);
        for _ in 0..params.n_estimators {
            let proba = raw_to_proba(&raw, outputs, binary);
            let mut stage = Vec::with_capacity(outputs);
            for k in 0..outputs {
                // residual = indicator - probability, on the k-th output
                let target_class = if binary { 1 } else { k };
                let resid: Vec<f64> = (0..n)
                    .map(|i| f64::from(u8::from(y[i] == target_class)) - proba[i * class_count + target_class])
                    .collect();
                let factor = if binary {
                    1.0
                } else {
                    (class_count as f64 - 1.0) / class_count as f64
                };
                let leaf = |leaf_rows: &[usize]| {
                    let num: f64 = leaf_rows.iter().map(|&i| resid[i]).sum();
                    let den: f64 = leaf_rows
                        .iter()
                        .map(|&i| resid[i].abs() * (1.0 - resid[i].abs()))
                        .sum();
                    if den.abs() < 1e-150 {
                        0.0
                    } else {
                        factor * num / den
                    }
                };
                let tree = RegressionTree::fit(
                    table,
                    &resid,
                    &rows,
                    params.max_depth,
                    params.min_samples_leaf,
                    &leaf,
                );
                for i in 0..n {
                    raw[i * outputs + k] += params.learning_rate * tree.predict(x.row(i));
                }
                stage.push(tree);
            }
            rounds.push(stage);
        }
        Self {
            init,
            rounds,
            learning_rate: params.learning_rate,
            class_count,
        }
    }
}

fn raw_to_proba(raw: &[f64], outputs: usize, binary: bool) -> Vec<f64> {
    if binary {
        raw.iter()
            .flat_map(|&z| {
                let p = 1.0 / (1.0 + (-z).exp());
                [1.0 - p, p]
            })
            .collect()
    } else {
        let mut out = raw.to_vec();
        for row in out.chunks_mut(outputs) {
            softmax_in_place(row, 1.0);
        }
        out
    }
}

impl Fitted for GradientBoosting {
    fn predict(&self, x: &FeatureMatrix) -> Vec<f64> {
        let outputs = self.init.len();
        let mut raw = Vec::with_capacity(x.rows() * outputs);
        for r in 0..x.rows() {
            let row = x.row(r);
            for k in 0..outputs {
                let z: f64 = self.init[k]
                    + self
                        .rounds
                        .iter()
                        .map(|stage| self.learning_rate * stage[k].predict(row))
                        .sum::<f64>();
                raw.push(z);
            }
        }
        let proba = raw_to_proba(&raw, outputs, self.class_count == 2);
        debug_assert_eq!(proba.len(), x.rows() * self.class_count);
        proba
    }
}
