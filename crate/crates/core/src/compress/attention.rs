//! Attention-weighted feature selection.
//!
//! A single attention layer `alpha(x) = softmax(W x + b)` gates the
//! standardized input, `z = alpha(x) * x`, and a linear softmax head is
//! trained on `z` with cross-entropy. Per-sample attention is averaged over
//! the training rows; columns with mean attention at or above its 75th
//! percentile are kept.

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use super::net::Adam;
use super::CompressError;
use crate::data::{FeatureMatrix, LabelVector};
use crate::learners::Standardizer;
use crate::{rng, stats};

pub const KEEP_PERCENTILE: f64 = 75.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttentionConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl Default for AttentionConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            batch_size: 32,
            learning_rate: 0.01,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttentionSelector {
    scaler: Standardizer,
    /// `d x d`, applied as `x W`.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    head: Array2<f64>,
    head_bias: Array1<f64>,
    /// Mean attention over the training rows; a probability vector.
    pub relevance: Vec<f64>,
    pub kept: Vec<usize>,
}

fn softmax_rows(z: &mut Array2<f64>) {
    for mut row in z.rows_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
}

/// Columns whose score reaches the 75th percentile (linear interpolation).
pub fn percentile_mask(scores: &[f64]) -> Vec<usize> {
    if scores.is_empty() {
        return Vec::new();
    }
    let q = stats::percentile(scores, KEEP_PERCENTILE);
    (0..scores.len()).filter(|&i| scores[i] >= q).collect()
}

impl AttentionSelector {
    pub fn fit(
        x: &FeatureMatrix,
        y: &LabelVector,
        cfg: &AttentionConfig,
        seed: u64,
    ) -> Result<Self, CompressError> {
        let d = x.cols();
        if d < 2 {
            return Err(CompressError::WidthTooSmall { needed: 2, found: d });
        }
        if x.rows() != y.len() || x.rows() == 0 {
            return Err(CompressError::ShapeMismatch(format!(
                "{} rows vs {} labels",
                x.rows(),
                y.len()
            )));
        }
        let classes = y.class_count().max(2);
        let scaler = Standardizer::fit(x);
        let xs = scaler.transform(x);
        let mut init = rng::derived_rng(seed, &[0]);
        // near-zero attention weights start from uniform attention
        let small = Uniform::new_inclusive(-0.01, 0.01).expect("finite bounds");
        let mut weights = Array2::from_shape_simple_fn((d, d), || small.sample(&mut init));
        let mut bias = Array1::zeros(d);
        let limit = (6.0 / (d + classes) as f64).sqrt();
        let head_init = Uniform::new_inclusive(-limit, limit).expect("finite bounds");
        let mut head = Array2::from_shape_simple_fn((d, classes), || head_init.sample(&mut init));
        let mut head_bias = Array1::zeros(classes);

        let mut target = Array2::<f64>::zeros((x.rows(), classes));
        for (i, &c) in y.values().iter().enumerate() {
            target[[i, c]] = 1.0;
        }

        let mut adam = Adam::new(cfg.learning_rate);
        let mut sw = Adam::slot(&weights);
        let mut sb = Adam::slot(&bias);
        let mut sh = Adam::slot(&head);
        let mut shb = Adam::slot(&head_bias);
        let mut order: Vec<usize> = (0..x.rows()).collect();
        for epoch in 0..cfg.epochs {
            order.shuffle(&mut rng::derived_rng(seed, &[1, epoch as u64]));
            for chunk in order.chunks(cfg.batch_size.max(1)) {
                let xb = xs.select(Axis(0), chunk);
                let tb = target.select(Axis(0), chunk);
                let m = chunk.len() as f64;
                let mut alpha = xb.dot(&weights) + &bias;
                softmax_rows(&mut alpha);
                let z = &alpha * &xb;
                let mut p = z.dot(&head) + &head_bias;
                softmax_rows(&mut p);
                let d_logits = (p - &tb) / m;
                let g_head = z.t().dot(&d_logits);
                let g_head_bias = d_logits.sum_axis(Axis(0));
                let d_alpha = d_logits.dot(&head.t()) * &xb;
                // softmax backward, row-wise: a * (g - <a, g>)
                let inner = (&d_alpha * &alpha).sum_axis(Axis(1)).insert_axis(Axis(1));
                let d_scores = &alpha * &(d_alpha - &inner);
                let g_weights = xb.t().dot(&d_scores);
                let g_bias = d_scores.sum_axis(Axis(0));
                adam.tick();
                adam.update(&mut weights, &g_weights, &mut sw);
                adam.update(&mut bias, &g_bias, &mut sb);
                adam.update(&mut head, &g_head, &mut sh);
                adam.update(&mut head_bias, &g_head_bias, &mut shb);
            }
        }

        let mut alpha = xs.dot(&weights) + &bias;
        softmax_rows(&mut alpha);
        let relevance = alpha
            .mean_axis(Axis(0))
            .expect("non-empty rows")
            .to_vec();
        let kept = percentile_mask(&relevance);
        Ok(Self {
            scaler,
            weights,
            bias,
            head,
            head_bias,
            relevance,
            kept,
        })
    }

    /// Class probabilities of the attention head (diagnostic).
    pub fn predict_proba(&self, x: &FeatureMatrix) -> Array2<f64> {
        let xs = self.scaler.transform(x);
        let mut alpha = xs.dot(&self.weights) + &self.bias;
        softmax_rows(&mut alpha);
        let mut p = (&alpha * &xs).dot(&self.head) + &self.head_bias;
        softmax_rows(&mut p);
        p
    }
}

pub struct AttentionResult {
    pub selector: AttentionSelector,
    pub train: FeatureMatrix,
    pub test: FeatureMatrix,
}

/// Fit on the training matrix and mask both matrices with the same columns.
pub fn attention_select(
    x_train: &FeatureMatrix,
    x_test: &FeatureMatrix,
    y: &LabelVector,
    seed: u64,
) -> Result<AttentionResult, CompressError> {
    attention_select_with(x_train, x_test, y, seed, &AttentionConfig::default())
}

pub fn attention_select_with(
    x_train: &FeatureMatrix,
    x_test: &FeatureMatrix,
    y: &LabelVector,
    seed: u64,
    cfg: &AttentionConfig,
) -> Result<AttentionResult, CompressError> {
    if x_train.cols() != x_test.cols() {
        return Err(CompressError::ShapeMismatch(format!(
            "train width {} vs test width {}",
            x_train.cols(),
            x_test.cols()
        )));
    }
    let selector = AttentionSelector::fit(x_train, y, cfg, seed)?;
    let train = x_train.select_columns(&selector.kept);
    let test = x_test.select_columns(&selector.kept);
    Ok(AttentionResult {
        selector,
        train,
        test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_keeps_top_quarter_of_eight() {
        let alpha = [0.05, 0.2, 0.1, 0.15, 0.08, 0.12, 0.18, 0.12];
        // sorted: .05 .08 .10 .12 .12 .15 .18 .20 -> Q75 at position 5.25
        let kept = percentile_mask(&alpha);
        assert_eq!(kept, vec![1, 6]);
    }

    #[test]
    fn uniform_attention_keeps_everything() {
        let alpha = [0.125; 8];
        assert_eq!(percentile_mask(&alpha).len(), 8);
    }

    #[test]
    fn relevance_is_probability_vector() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![(i % 2) as f64, (i % 5) as f64, (i % 3) as f64])
            .collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let y = LabelVector::from_values((0..40).map(|i| i % 2).collect());
        let cfg = AttentionConfig {
            epochs: 5,
            ..AttentionConfig::default()
        };
        let res = attention_select_with(&x, &x, &y, 1, &cfg).unwrap();
        let s: f64 = res.selector.relevance.iter().sum();
        assert!((s - 1.0).abs() < 1e-9);
        assert!(res.selector.relevance.iter().all(|&a| a >= 0.0));
        assert!(!res.selector.kept.is_empty());
        assert_eq!(res.train.cols(), res.selector.kept.len());
    }
}
