//! Noise-blurred percentile pruning.
//!
//! Scores are perturbed with Gaussian noise of standard deviation
//! `lambda * (max - min)`, then every model whose blurred score reaches the
//! percentile at rank `5 + 80 * std(blurred)^2` survives. A level whose
//! survivor count falls below `t_min` halts the recursion.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{rng, stats};

#[derive(Debug, Error, PartialEq)]
pub enum PruneError {
    #[error("score vector is empty")]
    EmptyScores,
    #[error("score vector contains non-finite values")]
    NonFiniteScores,
    #[error("{scores} scores for {models} models")]
    LengthMismatch { scores: usize, models: usize },
    #[error("invalid prune config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PruneConfig {
    pub lambda: f64,
    pub t_min: usize,
    pub seed: u64,
}

impl Default for PruneConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            t_min: 2,
            seed: 0,
        }
    }
}

impl PruneConfig {
    pub fn validate(&self) -> Result<(), PruneError> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(PruneError::InvalidConfig(format!(
                "lambda must be a non-negative number, got {}",
                self.lambda
            )));
        }
        if self.t_min == 0 {
            return Err(PruneError::InvalidConfig("t_min must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneOutcome {
    pub raw_scores: Vec<f64>,
    pub blurred_scores: Vec<f64>,
    pub percentile_rank: f64,
    pub threshold: f64,
    /// Positions (into the score vector) of the survivors, in pool order.
    pub retained: Vec<usize>,
    pub retained_ids: Vec<String>,
    pub halted: bool,
}

fn check_scores(a: &[f64]) -> Result<(), PruneError> {
    if a.is_empty() {
        return Err(PruneError::EmptyScores);
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(PruneError::NonFiniteScores);
    }
    Ok(())
}

/// Add `N(0, (lambda * range(a))^2)` noise to each score. Each position draws
/// from its own stream derived from `seed`, so the noise on model `i` does
/// not depend on how many models precede it.
pub fn blur_scores(a: &[f64], lambda: f64, seed: u64) -> Result<Vec<f64>, PruneError> {
    check_scores(a)?;
    let (lo, hi) = a
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let sigma = lambda * (hi - lo);
    if sigma == 0.0 {
        return Ok(a.to_vec());
    }
    Ok(a.iter()
        .enumerate()
        .map(|(i, &v)| {
            let z: f64 = StandardNormal.sample(&mut rng::derived_rng(seed, &[i as u64]));
            v + sigma * z
        })
        .collect())
}

/// Percentile rank `clamp(5 + 80 * std^2, 0, 100)` with population std.
pub fn percentile_rank(blurred: &[f64]) -> f64 {
    (5.0 + 80.0 * stats::variance(blurred)).clamp(0.0, 100.0)
}

/// Adaptive pruning threshold.
pub fn threshold(blurred: &[f64]) -> Result<f64, PruneError> {
    check_scores(blurred)?;
    Ok(stats::percentile(blurred, percentile_rank(blurred)))
}

/// Blur, threshold and select. `ids` names the model behind each score.
pub fn prune(a: &[f64], ids: &[String], cfg: &PruneConfig) -> Result<PruneOutcome, PruneError> {
    cfg.validate()?;
    if a.len() != ids.len() {
        return Err(PruneError::LengthMismatch {
            scores: a.len(),
            models: ids.len(),
        });
    }
    let blurred = blur_scores(a, cfg.lambda, cfg.seed)?;
    let rank = percentile_rank(&blurred);
    let q = threshold(&blurred)?;
    let retained: Vec<usize> = (0..blurred.len()).filter(|&i| blurred[i] >= q).collect();
    let retained_ids = retained.iter().map(|&i| ids[i].clone()).collect();
    let halted = retained.len() < cfg.t_min;
    Ok(PruneOutcome {
        raw_scores: a.to_vec(),
        blurred_scores: blurred,
        percentile_rank: rank,
        threshold: q,
        retained,
        retained_ids,
        halted,
    })
}
