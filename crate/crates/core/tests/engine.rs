mod common;

use std::sync::Arc;

use rocketstack::compress::{CompressionPlan, Method, Schedule};
use rocketstack::data::{synthetic, ColumnOrigin};
use rocketstack::engine::{oof_probabilities, run_experiment, ExperimentConfig, RunReport};
use rocketstack::learners::{Learner, LearnerKind, LearnerPool, LearnerSpec, TreeParams};
use rocketstack::{default_pool, Task};

use common::quick_pool;

fn quick_config(levels: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(quick_pool());
    cfg.levels = levels;
    cfg.outer_folds = 3;
    cfg.inner_folds = 3;
    cfg
}

/// Everything except wall-clock, which legitimately varies between runs.
fn without_timings(mut r: RunReport) -> RunReport {
    for f in &mut r.folds {
        for l in &mut f.levels {
            l.models.iter_mut().for_each(|m| m.seconds = 0.0);
        }
        f.stack_of_stack.iter_mut().for_each(|m| m.seconds = 0.0);
    }
    r
}

#[test]
fn oof_of_a_memorizing_tree_is_honest() {
    // 25% label noise: a full tree fits the training rows perfectly but cannot
    // predict held-out rows it never saw
    let mut ds = synthetic::blobs(200, 2, 2, 1.5, 3);
    let noisy: Vec<usize> = ds
        .labels
        .values()
        .iter()
        .enumerate()
        .map(|(i, &y)| if i % 4 == 0 { 1 - y } else { y })
        .collect();
    ds.labels = rocketstack::LabelVector::from_values(noisy);
    let tree = LearnerSpec::new("tree", LearnerKind::DecisionTree(TreeParams::default()));
    let pool = LearnerPool::from_specs(vec![tree.clone()]).unwrap();
    let oof = oof_probabilities(&pool, &[0], &ds.features, &ds.labels, 5, 1, 0).unwrap();
    let oof_acc =
        rocketstack::metrics::accuracy(ds.labels.values(), &oof.matrix.column(0).iter().map(|&p| usize::from(p > 0.5)).collect::<Vec<_>>())
            .unwrap();
    let fitted = tree.fit(&ds.features, &ds.labels, 0).unwrap();
    let train_acc =
        rocketstack::metrics::accuracy(ds.labels.values(), &fitted.predict_proba(&ds.features).unwrap().argmax()).unwrap();
    assert_eq!(train_acc, 1.0);
    assert!(oof_acc < 0.9, "oof accuracy {oof_acc}");
}

#[test]
fn oof_shapes_follow_model_and_class_counts() {
    let binary = synthetic::blobs(10, 2, 2, 2.0, 1);
    let pool = quick_pool();
    let oof = oof_probabilities(&pool, &[0, 1, 2], &binary.features, &binary.labels, 5, 1, 0).unwrap();
    assert_eq!((oof.matrix.rows(), oof.matrix.cols()), (10, 3));
    assert_eq!(oof.scores.len(), 3);

    let multi = synthetic::blobs(60, 2, 3, 2.0, 1);
    let oof = oof_probabilities(&pool, &[0, 1, 2, 3], &multi.features, &multi.labels, 5, 1, 0).unwrap();
    assert_eq!((oof.matrix.rows(), oof.matrix.cols()), (60, 12));
    assert!(matches!(
        &oof.matrix.column_meta()[5].origin,
        ColumnOrigin::Oof { model_id, class_index: 2 } if model_id == "gaussian_nb"
    ));
    for r in 0..60 {
        for m in 0..4 {
            let s: f64 = (0..3).map(|c| oof.matrix.get(r, m * 3 + c)).sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn binary_widths_grow_by_one_column_per_survivor() {
    let ds = synthetic::ring(150, 1, 4);
    let mut cfg = quick_config(3);
    cfg.prune.t_min = 1;
    let report = run_experiment(&ds, &cfg).unwrap();
    for f in &report.folds {
        assert_eq!(f.levels[0].feature_count, 3);
        for w in f.levels.windows(2) {
            assert_eq!(w[1].feature_count, w[0].feature_count + w[0].survivors.len());
        }
        let expected_stack: usize = f.levels.iter().map(|l| l.feature_count).sum();
        assert_eq!(f.stack_width, expected_stack);
    }
}

#[test]
fn schedules_fire_where_declared() {
    let ds = synthetic::blobs(90, 4, 3, 1.5, 2);
    for (schedule, expect) in [
        (Schedule::None, vec![]),
        (Schedule::EachLevel, vec![1, 2, 3, 4]),
        (Schedule::Periodic, vec![3]),
    ] {
        let mut cfg = quick_config(4);
        cfg.prune.t_min = 1;
        cfg.plan = CompressionPlan::new(schedule, Method::Sfe);
        let report = run_experiment(&ds, &cfg).unwrap();
        for f in &report.folds {
            let fired: Vec<usize> = f.levels.iter().filter(|l| l.compression.is_some()).map(|l| l.level).collect();
            assert_eq!(fired, expect, "{schedule:?}");
            if schedule == Schedule::Periodic {
                assert!(f.levels[2].feature_count > f.levels[1].feature_count);
                assert!(f.levels[3].feature_count < f.levels[3].blended_width);
            }
        }
    }
}

#[test]
fn repeated_runs_agree() {
    let ds = synthetic::blobs(90, 3, 2, 1.0, 5);
    let mut cfg = quick_config(2);
    cfg.prune.lambda = 0.1;
    cfg.plan = CompressionPlan::new(Schedule::EachLevel, Method::Ae2);
    let a = run_experiment(&ds, &cfg).unwrap();
    let b = run_experiment(&ds, &cfg).unwrap();
    assert_eq!(without_timings(a), without_timings(b));
}

#[test]
fn seed_changes_the_run() {
    let ds = synthetic::blobs(90, 3, 2, 1.0, 5);
    let mut cfg = quick_config(1);
    let a = run_experiment(&ds, &cfg).unwrap();
    cfg.seed = 99;
    let b = run_experiment(&ds, &cfg).unwrap();
    assert_ne!(without_timings(a), without_timings(b));
}

#[test]
fn survivors_never_grow_and_halt_ends_the_report() {
    let ds = synthetic::blobs(120, 3, 2, 1.0, 6);
    let mut cfg = quick_config(6);
    cfg.prune.lambda = 0.05;
    let report = run_experiment(&ds, &cfg).unwrap();
    for f in &report.folds {
        for (i, l) in f.levels.iter().enumerate() {
            assert_eq!(l.level, i);
            if i > 0 {
                assert!(l.survivors.len() <= f.levels[i - 1].survivors.len());
                assert_eq!(l.models.len(), f.levels[i - 1].survivors.len());
            }
        }
        match f.halted_at() {
            Some(h) => {
                assert_eq!(h, f.levels.len() - 1);
                assert!(f.levels[h].survivors.len() < cfg.prune.t_min);
            }
            None => assert_eq!(f.levels.len(), cfg.levels + 1),
        }
    }
}

#[test]
fn halted_level_stays_out_of_the_stack() {
    let ds = synthetic::blobs(90, 3, 2, 1.0, 7);
    let mut cfg = quick_config(3);
    cfg.prune.t_min = cfg.pool.len();
    let report = run_experiment(&ds, &cfg).unwrap();
    for f in &report.folds {
        assert_eq!(f.halted_at(), Some(1));
        assert_eq!(f.stack_width, f.levels[0].feature_count);
        assert_eq!(f.stack_of_stack.len(), cfg.pool.len());
    }
}

#[test]
fn too_few_members_for_inner_folds_is_reported() {
    let ds = synthetic::blobs(12, 2, 2, 2.0, 1);
    let mut cfg = quick_config(1);
    cfg.inner_folds = 6;
    assert!(run_experiment(&ds, &cfg).is_err());
}

#[test]
fn custom_learners_join_the_pool() {
    let specs = common::quick_specs();
    let members: Vec<Arc<dyn Learner>> = specs.into_iter().map(|s| Arc::new(s) as Arc<dyn Learner>).collect();
    let pool = LearnerPool::new(members).unwrap();
    let mut cfg = ExperimentConfig::new(pool);
    cfg.levels = 1;
    cfg.outer_folds = 2;
    cfg.inner_folds = 2;
    let report = run_experiment(&synthetic::xor(80, 1), &cfg).unwrap();
    assert_eq!(report.pool, vec!["logreg", "gaussian_nb", "knn", "stump"]);
}

#[test]
fn ring_level_one_keeps_pace_with_best_base_model() {
    let ds = synthetic::ring(600, 2, 7);
    let mut cfg = ExperimentConfig::new(default_pool(Task::Binary));
    cfg.levels = 1;
    cfg.seed = 7;
    let report = run_experiment(&ds, &cfg).unwrap();
    let best = |level: usize| -> f64 {
        let per_model: Vec<f64> = (0..report.folds[0].levels[level].models.len())
            .map(|m| {
                let accs: Vec<f64> = report.folds.iter().map(|f| f.levels[level].models[m].metrics.accuracy).collect();
                rocketstack::stats::mean(&accs)
            })
            .collect();
        per_model.into_iter().fold(f64::NEG_INFINITY, f64::max)
    };
    assert!(best(1) >= best(0) - 0.01, "level 1 {} vs level 0 {}", best(1), best(0));
}
