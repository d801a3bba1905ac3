#![allow(dead_code)]

use std::collections::HashSet;
use std::fmt;
use std::sync::{Arc, Mutex};

use rocketstack::data::{ColumnMeta, FeatureMatrix};
use rocketstack::learners::{
    Classifier, GaussianNbParams, KnnParams, Learner, LearnerError, LearnerKind, LearnerPool, LearnerSpec,
    LogisticParams, ProbaMatrix, TreeParams,
};
use rocketstack::{Dataset, LabelVector};

/// Running totals of every prediction an instrumented model made.
#[derive(Debug, Default)]
pub struct LeakLog {
    pub predicted_rows: usize,
    pub violations: usize,
    pub fits: usize,
}

/// Wraps a learner on data whose last column holds the global row id. The id
/// column is stripped before the inner learner sees anything; every prediction
/// checks its row ids against the ids the model was trained on.
pub struct Instrumented {
    pub inner: LearnerSpec,
    pub log: Arc<Mutex<LeakLog>>,
}

impl fmt::Debug for Instrumented {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Instrumented({})", self.inner.id)
    }
}

fn split_ids(x: &FeatureMatrix) -> (FeatureMatrix, Vec<usize>) {
    let last = x.cols() - 1;
    let ids = x.column(last).iter().map(|&v| v as usize).collect();
    let body: Vec<usize> = (0..last).collect();
    (x.select_columns(&body), ids)
}

struct InstrumentedModel {
    inner: Box<dyn Classifier>,
    seen: HashSet<usize>,
    log: Arc<Mutex<LeakLog>>,
}

impl Classifier for InstrumentedModel {
    fn class_count(&self) -> usize {
        self.inner.class_count()
    }

    fn input_width(&self) -> usize {
        self.inner.input_width() + 1
    }

    fn predict_proba(&self, x: &FeatureMatrix) -> Result<ProbaMatrix, LearnerError> {
        let (body, ids) = split_ids(x);
        let overlap = ids.iter().filter(|i| self.seen.contains(i)).count();
        {
            let mut log = self.log.lock().unwrap();
            log.predicted_rows += ids.len();
            log.violations += overlap;
        }
        self.inner.predict_proba(&body)
    }
}

impl Learner for Instrumented {
    fn id(&self) -> &str {
        &self.inner.id
    }

    fn fit(&self, x: &FeatureMatrix, y: &LabelVector, seed: u64) -> Result<Box<dyn Classifier>, LearnerError> {
        let (body, ids) = split_ids(x);
        self.log.lock().unwrap().fits += 1;
        Ok(Box::new(InstrumentedModel {
            inner: self.inner.fit(&body, y, seed)?,
            seen: ids.into_iter().collect(),
            log: Arc::clone(&self.log),
        }))
    }
}

/// Small, fast pool used where the default pool would only add runtime.
pub fn quick_specs() -> Vec<LearnerSpec> {
    vec![
        LearnerSpec::new("logreg", LearnerKind::LogisticRegression(LogisticParams::default())),
        LearnerSpec::new("gaussian_nb", LearnerKind::GaussianNb(GaussianNbParams::default())),
        LearnerSpec::new("knn", LearnerKind::Knn(KnnParams::default())),
        LearnerSpec::new(
            "stump",
            LearnerKind::DecisionTree(TreeParams {
                max_depth: Some(3),
                ..TreeParams::default()
            }),
        ),
    ]
}

pub fn quick_pool() -> LearnerPool {
    LearnerPool::from_specs(quick_specs()).unwrap()
}

pub fn instrumented_pool(log: &Arc<Mutex<LeakLog>>) -> LearnerPool {
    let members = quick_specs()
        .into_iter()
        .map(|inner| {
            Arc::new(Instrumented {
                inner,
                log: Arc::clone(log),
            }) as Arc<dyn Learner>
        })
        .collect();
    LearnerPool::new(members).unwrap()
}

/// Append the global row index as a trailing feature.
pub fn with_row_ids(ds: &Dataset) -> Dataset {
    let n = ds.features.rows();
    let ids = FeatureMatrix::new(
        n,
        1,
        (0..n).map(|i| i as f64).collect(),
        vec![ColumnMeta::original("row_id")],
    )
    .unwrap();
    Dataset::new(ds.features.hconcat(&ids).unwrap(), ds.labels.clone()).unwrap()
}

/// Write a dataset as CSV with columns `f0..` and a trailing `label` column.
pub fn write_csv(ds: &Dataset, path: &std::path::Path) {
    let mut out = String::new();
    let cols = ds.features.cols();
    let header: Vec<String> = (0..cols).map(|j| format!("f{j}")).chain(["label".into()]).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for r in 0..ds.features.rows() {
        let mut cells: Vec<String> = ds.features.row(r).iter().map(|v| format!("{v}")).collect();
        cells.push(ds.labels.values()[r].to_string());
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).unwrap();
}
