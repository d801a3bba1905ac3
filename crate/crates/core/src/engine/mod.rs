//! The recursive stacking loop.
//!
//! Per outer fold: baseline fits of the whole pool on the original features,
//! then levels `1..=L` until pruning halts, then a stack-of-stacking fit of the
//! whole pool on every completed level's features side by side.
//!
//! All randomness is keyed by `(seed, fold, level, model, purpose)`, and every
//! parallel collection preserves input order, so a run is reproducible for any
//! thread count.

mod level;
mod report;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::compress::{CompressError, CompressionPlan};
use crate::data::{stratified_folds, DataError, Dataset};
use crate::learners::{default_pool, LearnerError, LearnerPool};
use crate::metrics::MetricsError;
use crate::prune::{PruneConfig, PruneError};
use crate::rng::{self, purpose};

pub use level::{blend, meta_matrix, meta_width, oof_probabilities, run_level, FoldData, FoldState, OofOutput};
pub use report::{
    CompressionEvent, DatasetDescriptor, FoldReport, LevelRecord, ModelResult, RunReport,
};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error("train and test columns disagree: {0}")]
    Misaligned(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Prune(#[from] PruneError),
    #[error(transparent)]
    Compress(#[from] CompressError),
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub levels: usize,
    pub outer_folds: usize,
    pub inner_folds: usize,
    pub plan: CompressionPlan,
    pub prune: PruneConfig,
    #[serde(serialize_with = "pool_ids")]
    pub pool: LearnerPool,
    pub seed: u64,
}

fn pool_ids<S: serde::Serializer>(pool: &LearnerPool, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(pool.ids())
}

impl ExperimentConfig {
    /// Ten levels, 5 x 5 folds, no compression, strict pruning.
    pub fn new(pool: LearnerPool) -> Self {
        Self {
            levels: 10,
            outer_folds: 5,
            inner_folds: 5,
            plan: CompressionPlan::none(),
            prune: PruneConfig::default(),
            pool,
            seed: 0,
        }
    }

    pub fn for_dataset(dataset: &Dataset) -> Self {
        Self::new(default_pool(dataset.task))
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.levels < 1 {
            return Err(EngineError::InvalidConfig("levels must be at least 1".into()));
        }
        if self.outer_folds < 2 || self.inner_folds < 2 {
            return Err(EngineError::InvalidConfig(format!(
                "fold counts must be at least 2, got outer {} and inner {}",
                self.outer_folds, self.inner_folds
            )));
        }
        self.prune.validate()?;
        Ok(())
    }
}

/// Run the full protocol on `dataset`.
pub fn run_experiment(dataset: &Dataset, cfg: &ExperimentConfig) -> Result<RunReport, EngineError> {
    cfg.validate()?;
    let outer = stratified_folds(
        &dataset.labels,
        cfg.outer_folds,
        rng::derive(cfg.seed, &[purpose::OUTER_FOLDS]),
    )?;
    let folds = (0..cfg.outer_folds)
        .into_par_iter()
        .map(|fold| run_fold(dataset, cfg, fold, &outer.train_indices(fold), &outer.test_indices(fold)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RunReport {
        dataset: DatasetDescriptor {
            rows: dataset.features.rows(),
            cols: dataset.features.cols(),
            classes: dataset.class_count(),
            task: dataset.task,
        },
        pool: cfg.pool.ids(),
        folds,
    })
}

fn run_fold(
    dataset: &Dataset,
    cfg: &ExperimentConfig,
    fold: usize,
    train_idx: &[usize],
    test_idx: &[usize],
) -> Result<FoldReport, EngineError> {
    let x_train = dataset.features.select_rows(train_idx);
    let x_test = dataset.features.select_rows(test_idx);
    let y_train = dataset.labels.select(train_idx);
    let y_test = dataset.labels.select(test_idx);
    let data = FoldData {
        y_train: &y_train,
        y_test: &y_test,
        seed: rng::derive(cfg.seed, &[fold as u64]),
    };
    let everyone: Vec<usize> = (0..cfg.pool.len()).collect();

    let baseline = level::fit_and_evaluate(
        &cfg.pool,
        &everyone,
        &x_train,
        &x_test,
        &data,
        &[0, purpose::BASELINE],
    )?;
    let (models, test_preds): (Vec<_>, Vec<_>) = baseline.into_iter().unzip();
    let mut levels = vec![LevelRecord {
        level: 0,
        feature_count: x_train.cols(),
        blended_width: x_train.cols(),
        compression: None,
        models,
        prune: None,
        survivors: cfg.pool.ids(),
        halted: false,
    }];

    let mut state = FoldState {
        stack_train: x_train.clone(),
        stack_test: x_test.clone(),
        train: x_train,
        test: x_test,
        survivors: everyone.clone(),
        test_preds,
    };
    for l in 1..=cfg.levels {
        let (record, next) = run_level(&state, l, cfg, &data)?;
        levels.push(record);
        match next {
            Some(s) => state = s,
            None => break,
        }
    }

    let stack = level::fit_and_evaluate(
        &cfg.pool,
        &everyone,
        &state.stack_train,
        &state.stack_test,
        &data,
        &[purpose::STACK],
    )?;
    Ok(FoldReport {
        fold,
        train_rows: train_idx.len(),
        test_rows: test_idx.len(),
        levels,
        stack_width: state.stack_train.cols(),
        stack_of_stack: stack.into_iter().map(|(r, _)| r).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synthetic;

    #[test]
    fn rejects_zero_levels_and_single_fold() {
        let ds = synthetic::blobs(40, 2, 2, 3.0, 1);
        let mut cfg = ExperimentConfig::for_dataset(&ds);
        cfg.levels = 0;
        assert!(matches!(run_experiment(&ds, &cfg), Err(EngineError::InvalidConfig(_))));
        cfg.levels = 1;
        cfg.inner_folds = 1;
        assert!(matches!(run_experiment(&ds, &cfg), Err(EngineError::InvalidConfig(_))));
    }

    #[test]
    fn meta_width_by_task() {
        assert_eq!(meta_width(2), 1);
        assert_eq!(meta_width(3), 3);
    }
}
