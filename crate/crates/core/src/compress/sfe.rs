//! Greedy relevance/redundancy filter.
//!
//! Utility `U(f) = Rel(f) / (1 + Red(f))` where `Rel` is the absolute Pearson
//! correlation with the integer-coded target and `Red` the largest absolute
//! correlation with any already selected column.

use serde::{Deserialize, Serialize};

use super::CompressError;
use crate::data::{FeatureMatrix, LabelVector};
use crate::stats::pearson;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SfeConfig {
    /// Defaults to `ceil(sqrt(d))`.
    pub max_features: Option<usize>,
    /// Stop once the best remaining utility falls below this.
    pub min_utility: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SfeStep {
    pub index: usize,
    pub utility: f64,
}

#[derive(Debug, Clone)]
pub struct SfeResult {
    /// Selected column indices, in selection order.
    pub selected: Vec<usize>,
    pub trace: Vec<SfeStep>,
    pub train: FeatureMatrix,
    pub test: FeatureMatrix,
}

/// Greedy selection trace on `x` only (no transformation).
pub fn sfe_trace(x: &FeatureMatrix, y: &LabelVector, cfg: &SfeConfig) -> Result<Vec<SfeStep>, CompressError> {
    let d = x.cols();
    if d == 0 || x.rows() == 0 {
        return Err(CompressError::EmptyMatrix);
    }
    if x.rows() != y.len() {
        return Err(CompressError::ShapeMismatch(format!(
            "{} rows vs {} labels",
            x.rows(),
            y.len()
        )));
    }
    let limit = cfg
        .max_features
        .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
        .clamp(1, d);
    let target: Vec<f64> = y.values().iter().map(|&v| v as f64).collect();
    let columns: Vec<Vec<f64>> = (0..d).map(|j| x.column(j)).collect();
    let relevance: Vec<f64> = columns.iter().map(|c| pearson(c, &target).abs()).collect();
    let mut redundancy = vec![0.0f64; d];
    let mut chosen = vec![false; d];
    let mut trace: Vec<SfeStep> = Vec::new();
    while trace.len() < limit {
        let mut best: Option<(usize, f64)> = None;
        for j in (0..d).filter(|&j| !chosen[j]) {
            let u = relevance[j] / (1.0 + redundancy[j]);
            if best.is_none_or(|(_, b)| u > b) {
                best = Some((j, u));
            }
        }
        let Some((j, u)) = best else { break };
        if !trace.is_empty() {
            if u <= 0.0 {
                break;
            }
            if cfg.min_utility.is_some_and(|m| u < m) {
                break;
            }
        }
        chosen[j] = true;
        trace.push(SfeStep { index: j, utility: u });
        for k in (0..d).filter(|&k| !chosen[k]) {
            let r = pearson(&columns[k], &columns[j]).abs();
            redundancy[k] = redundancy[k].max(r);
        }
    }
    Ok(trace)
}

/// Select on the training matrix and apply the same columns to the test matrix.
pub fn sfe_select(
    x_train: &FeatureMatrix,
    x_test: &FeatureMatrix,
    y: &LabelVector,
    cfg: &SfeConfig,
) -> Result<SfeResult, CompressError> {
    if x_train.cols() != x_test.cols() {
        return Err(CompressError::ShapeMismatch(format!(
            "train width {} vs test width {}",
            x_train.cols(),
            x_test.cols()
        )));
    }
    let trace = sfe_trace(x_train, y, cfg)?;
    let selected: Vec<usize> = trace.iter().map(|s| s.index).collect();
    Ok(SfeResult {
        train: x_train.select_columns(&selected),
        test: x_test.select_columns(&selected),
        selected,
        trace,
    })
}
