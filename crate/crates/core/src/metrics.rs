//! Classification metrics for reporting and pruning.
//!
//! Precision, recall and F1 are support-weighted averages over classes, so
//! weighted recall equals accuracy identically.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::learners::ProbaMatrix;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("length mismatch: {0} labels vs {1} predictions")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    EmptyInput,
    #[error("ROC-AUC needs both classes present")]
    SingleClassPresent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub accuracy: f64,
    pub f1_weighted: f64,
    pub precision_weighted: f64,
    pub recall_weighted: f64,
    pub log_loss: f64,
    pub roc_auc: Option<f64>,
}

pub const LOG_LOSS_EPS: f64 = 1e-15;

fn check(y_true: &[usize], n: usize) -> Result<(), MetricsError> {
    if y_true.len() != n {
        return Err(MetricsError::LengthMismatch(y_true.len(), n));
    }
    if n == 0 {
        return Err(MetricsError::EmptyInput);
    }
    Ok(())
}

pub fn accuracy(y_true: &[usize], y_pred: &[usize]) -> Result<f64, MetricsError> {
    check(y_true, y_pred.len())?;
    let hits = y_true.iter().zip(y_pred).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / y_true.len() as f64)
}

/// Support-weighted `(precision, recall, f1)`. Undefined ratios count as 0.
pub fn weighted_prf(
    y_true: &[usize],
    y_pred: &[usize],
    class_count: usize,
) -> Result<(f64, f64, f64), MetricsError> {
    check(y_true, y_pred.len())?;
    let width = class_count
        .max(y_true.iter().chain(y_pred).max().map_or(0, |m| m + 1));
    let mut tp = vec![0usize; width];
    let mut predicted = vec![0usize; width];
    let mut support = vec![0usize; width];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        support[t] += 1;
        predicted[p] += 1;
        if t == p {
            tp[t] += 1;
        }
    }
    let n = y_true.len() as f64;
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let (mut p_w, mut r_w, mut f_w) = (0.0, 0.0, 0.0);
    for c in 0..width {
        if support[c] == 0 {
            continue;
        }
        let w = support[c] as f64 / n;
        let p = ratio(tp[c], predicted[c]);
        let r = ratio(tp[c], support[c]);
        let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        p_w += w * p;
        r_w += w * r;
        f_w += w * f;
    }
    Ok((p_w, r_w, f_w))
}

/// Mean negative log-likelihood of the true class, clipped to `[eps, 1 - eps]`.
pub fn log_loss(y_true: &[usize], proba: &ProbaMatrix, eps: f64) -> Result<f64, MetricsError> {
    check(y_true, proba.rows())?;
    let total: f64 = y_true
        .iter()
        .enumerate()
        .map(|(i, &c)| -proba.get(i, c).clamp(eps, 1.0 - eps).ln())
        .sum();
    Ok(total / y_true.len() as f64)
}

/// Binary ROC-AUC via the Mann-Whitney rank statistic with mid-ranks for ties.
pub fn roc_auc_binary(y_true: &[usize], score: &[f64]) -> Result<f64, MetricsError> {
    check(y_true, score.len())?;
    let n_pos = y_true.iter().filter(|&&y| y == 1).count();
    let n_neg = y_true.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(MetricsError::SingleClassPresent);
    }
    let mut order: Vec<usize> = (0..score.len()).collect();
    order.sort_by(|&a, &b| score[a].total_cmp(&score[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && score[order[j + 1]] == score[order[i]] {
            j += 1;
        }
        // ranks are 1-based; tied block i..=j shares the mid-rank
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            if y_true[idx] == 1 {
                rank_sum_pos += mid;
            }
        }
        i = j + 1;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Full record for a probability matrix; ROC-AUC is filled for binary tasks.
pub fn evaluate(y_true: &[usize], proba: &ProbaMatrix) -> Result<MetricsRecord, MetricsError> {
    let y_pred = proba.argmax();
    let class_count = proba.cols();
    let acc = accuracy(y_true, &y_pred)?;
    let (precision, recall, f1) = weighted_prf(y_true, &y_pred, class_count)?;
    let ll = log_loss(y_true, proba, LOG_LOSS_EPS)?;
    let roc_auc = if class_count == 2 {
        roc_auc_binary(y_true, &proba.column(1)).ok()
    } else {
        None
    };
    Ok(MetricsRecord {
        accuracy: acc,
        f1_weighted: f1,
        precision_weighted: precision,
        recall_weighted: recall,
        log_loss: ll,
        roc_auc,
    })
}
