use std::time::Instant;

use rayon::prelude::*;

use super::report::{CompressionEvent, LevelRecord, ModelResult};
use super::{EngineError, ExperimentConfig};
use crate::compress;
use crate::data::{stratified_folds, ColumnMeta, ColumnOrigin, FeatureMatrix, LabelVector};
use crate::learners::{LearnerPool, ProbaMatrix};
use crate::metrics;
use crate::prune::{self, PruneConfig};
use crate::rng::{self, purpose};

/// Meta-feature columns a probability matrix contributes: the positive-class
/// column for two classes, every class otherwise.
pub fn meta_width(class_count: usize) -> usize {
    if class_count == 2 {
        1
    } else {
        class_count
    }
}

fn meta_classes(class_count: usize) -> Vec<usize> {
    if class_count == 2 {
        vec![1]
    } else {
        (0..class_count).collect()
    }
}

/// Column-wise pack of per-model probability matrices, in the given order.
pub fn meta_matrix(
    level: usize,
    ids: &[&str],
    probas: &[&ProbaMatrix],
    class_count: usize,
) -> Result<FeatureMatrix, EngineError> {
    let rows = probas.first().map_or(0, |p| p.rows());
    let classes = meta_classes(class_count);
    let cols = probas.len() * classes.len();
    let mut values = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for p in probas {
            values.extend(classes.iter().map(|&c| p.get(r, c)));
        }
    }
    let meta = ids
        .iter()
        .flat_map(|id| {
            classes.iter().map(move |&c| ColumnMeta {
                name: format!("L{level}_{id}_p{c}"),
                origin: ColumnOrigin::Oof {
                    model_id: (*id).to_owned(),
                    class_index: c,
                },
            })
        })
        .collect();
    Ok(FeatureMatrix::new(rows, cols, values, meta)?)
}

/// Out-of-fold probabilities and pruning scores for a set of models.
#[derive(Debug, Clone)]
pub struct OofOutput {
    /// `rows x (models * meta_width)`, columns grouped by model then class.
    pub matrix: FeatureMatrix,
    /// ROC-AUC (two classes) or accuracy of each model's OOF predictions.
    pub scores: Vec<f64>,
    pub seconds: Vec<f64>,
}

/// Inner cross-validation over `members` (indices into `pool`). Row `i` of
/// the output only comes from fits whose training rows exclude `i`.
pub fn oof_probabilities(
    pool: &LearnerPool,
    members: &[usize],
    x: &FeatureMatrix,
    y: &LabelVector,
    inner_folds: usize,
    level: usize,
    seed: u64,
) -> Result<OofOutput, EngineError> {
    let plan = stratified_folds(y, inner_folds, rng::derive(seed, &[purpose::INNER_FOLDS]))?;
    let class_count = y.class_count();
    let jobs: Vec<(usize, usize)> = members
        .iter()
        .flat_map(|&m| (0..inner_folds).map(move |k| (m, k)))
        .collect();
    let parts = jobs
        .par_iter()
        .map(|&(m, k)| {
            let start = Instant::now();
            let train = plan.train_indices(k);
            let test = plan.test_indices(k);
            let fit_seed = rng::derive(seed, &[purpose::OOF_FIT, m as u64, k as u64]);
            let model = pool
                .get(m)
                .fit(&x.select_rows(&train), &y.select(&train), fit_seed)?;
            let proba = model.predict_proba(&x.select_rows(&test))?;
            Ok((test, proba, start.elapsed().as_secs_f64()))
        })
        .collect::<Result<Vec<_>, EngineError>>()?;

    let n = x.rows();
    let mut per_model: Vec<Vec<f64>> = vec![vec![0.0; n * class_count]; members.len()];
    let mut seconds = vec![0.0; members.len()];
    for (j, (test, proba, secs)) in parts.into_iter().enumerate() {
        let slot = j / inner_folds;
        seconds[slot] += secs;
        for (r, &row) in test.iter().enumerate() {
            per_model[slot][row * class_count..(row + 1) * class_count]
                .copy_from_slice(proba.row(r));
        }
    }
    let probas = per_model
        .into_iter()
        .map(|v| ProbaMatrix::new(n, class_count, v))
        .collect::<Result<Vec<_>, _>>()?;
    let scores = probas
        .iter()
        .map(|p| oof_score(y, p))
        .collect::<Result<Vec<_>, _>>()?;
    let ids: Vec<&str> = members.iter().map(|&m| pool.get(m).id()).collect();
    let refs: Vec<&ProbaMatrix> = probas.iter().collect();
    Ok(OofOutput {
        matrix: meta_matrix(level, &ids, &refs, class_count)?,
        scores,
        seconds,
    })
}

fn oof_score(y: &LabelVector, p: &ProbaMatrix) -> Result<f64, metrics::MetricsError> {
    if y.class_count() == 2 {
        metrics::roc_auc_binary(y.values(), &p.column(1))
    } else {
        metrics::accuracy(y.values(), &p.argmax())
    }
}

/// `[P, X]` on both sides; the column metadata of the two sides must agree.
pub fn blend(
    p_train: &FeatureMatrix,
    prev_train: &FeatureMatrix,
    p_test: &FeatureMatrix,
    prev_test: &FeatureMatrix,
) -> Result<(FeatureMatrix, FeatureMatrix), EngineError> {
    let train = p_train.hconcat(prev_train)?;
    let test = p_test.hconcat(prev_test)?;
    if train.column_meta() != test.column_meta() {
        return Err(EngineError::Misaligned(format!(
            "train has {} columns, test {}",
            train.cols(),
            test.cols()
        )));
    }
    Ok((train, test))
}

/// Per-fold recursion state between levels.
#[derive(Debug, Clone)]
pub struct FoldState {
    pub train: FeatureMatrix,
    pub test: FeatureMatrix,
    /// Pool indices of the current survivors, in pool order.
    pub survivors: Vec<usize>,
    /// Test-side probabilities of each survivor, fitted on `train`.
    pub test_preds: Vec<ProbaMatrix>,
    pub stack_train: FeatureMatrix,
    pub stack_test: FeatureMatrix,
}

pub struct FoldData<'a> {
    pub y_train: &'a LabelVector,
    pub y_test: &'a LabelVector,
    pub seed: u64,
}

/// Fit `members` on `train`, predict `test`. Returns results and test probabilities.
pub fn fit_and_evaluate(
    pool: &LearnerPool,
    members: &[usize],
    train: &FeatureMatrix,
    test: &FeatureMatrix,
    data: &FoldData<'_>,
    seed_path: &[u64],
) -> Result<Vec<(ModelResult, ProbaMatrix)>, EngineError> {
    members
        .par_iter()
        .map(|&m| {
            let start = Instant::now();
            let mut path = seed_path.to_vec();
            path.push(m as u64);
            let learner = pool.get(m);
            let model = learner.fit(train, data.y_train, rng::derive(data.seed, &path))?;
            let proba = model.predict_proba(test)?;
            let seconds = start.elapsed().as_secs_f64();
            let metrics = metrics::evaluate(data.y_test.values(), &proba)?;
            let result = ModelResult {
                model_id: learner.id().to_owned(),
                metrics,
                oof_score: None,
                seconds,
            };
            Ok((result, proba))
        })
        .collect()
}

/// One recursion: OOF, blend, optional compression, meta-learning, pruning.
/// Returns the level's record and, unless pruning halted, the next state.
pub fn run_level(
    state: &FoldState,
    level: usize,
    cfg: &ExperimentConfig,
    data: &FoldData<'_>,
) -> Result<(LevelRecord, Option<FoldState>), EngineError> {
    let pool = &cfg.pool;
    let class_count = data.y_train.class_count();
    let level_seed = rng::derive(data.seed, &[level as u64]);

    let oof = oof_probabilities(
        pool,
        &state.survivors,
        &state.train,
        data.y_train,
        cfg.inner_folds,
        level,
        level_seed,
    )?;
    let ids: Vec<&str> = state.survivors.iter().map(|&m| pool.get(m).id()).collect();
    let pred_refs: Vec<&ProbaMatrix> = state.test_preds.iter().collect();
    let p_test = meta_matrix(level, &ids, &pred_refs, class_count)?;
    let (mut train, mut test) = blend(&oof.matrix, &state.train, &p_test, &state.test)?;
    let blended_width = train.cols();

    let mut compression = None;
    if cfg.plan.fires_at(level) {
        let c = compress::apply(
            &cfg.plan,
            level,
            &train,
            &test,
            data.y_train,
            rng::derive(level_seed, &[purpose::COMPRESS]),
        )?;
        compression = Some(CompressionEvent {
            method: cfg.plan.method,
            width_before: blended_width,
            width_after: c.train.cols(),
        });
        train = c.train;
        test = c.test;
    }

    let fitted = fit_and_evaluate(
        pool,
        &state.survivors,
        &train,
        &test,
        data,
        &[level as u64, purpose::FIT],
    )?;

    let id_strings: Vec<String> = ids.iter().map(|s| (*s).to_owned()).collect();
    let prune_cfg = PruneConfig {
        seed: rng::derive(level_seed, &[purpose::BLUR, cfg.prune.seed]),
        ..cfg.prune
    };
    let outcome = prune::prune(&oof.scores, &id_strings, &prune_cfg)?;

    let mut models = Vec::with_capacity(fitted.len());
    let mut test_preds = Vec::with_capacity(fitted.len());
    for (j, (mut result, proba)) in fitted.into_iter().enumerate() {
        result.oof_score = Some(oof.scores[j]);
        result.seconds += oof.seconds[j];
        models.push(result);
        test_preds.push(proba);
    }

    let record = LevelRecord {
        level,
        feature_count: train.cols(),
        blended_width,
        compression,
        models,
        survivors: outcome.retained_ids.clone(),
        halted: outcome.halted,
        prune: None,
    };
    if outcome.halted {
        return Ok((
            LevelRecord {
                prune: Some(outcome),
                ..record
            },
            None,
        ));
    }

    let survivors = outcome.retained.iter().map(|&j| state.survivors[j]).collect();
    let mut preds: Vec<Option<ProbaMatrix>> = test_preds.into_iter().map(Some).collect();
    let test_preds = outcome
        .retained
        .iter()
        .map(|&j| preds[j].take().expect("retained positions are distinct"))
        .collect();
    let next = FoldState {
        stack_train: state.stack_train.hconcat(&train)?,
        stack_test: state.stack_test.hconcat(&test)?,
        train,
        test,
        survivors,
        test_preds,
    };
    Ok((
        LevelRecord {
            prune: Some(outcome),
            ..record
        },
        Some(next),
    ))
}
