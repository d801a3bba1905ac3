//! Pool of probabilistic base learners behind a fit / predict-probability
//! abstraction.
//!
//! Every learner is implemented in-crate and is deterministic for a fixed
//! seed. The engine only sees the [`Learner`] and [`Classifier`] traits, so
//! custom learners (for instance instrumented wrappers in tests) can be mixed
//! into a [`LearnerPool`].

mod boosting;
mod ensemble;
mod knn;
mod linear;
mod mlp;
mod naive_bayes;
mod scale;
pub mod tree;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{FeatureMatrix, LabelVector, Task};
use crate::rng;

pub use boosting::{AdaBoostParams, GradientBoostingParams};
pub use ensemble::ForestParams;
pub use knn::KnnParams;
pub use linear::LogisticParams;
pub use mlp::MlpParams;
pub use naive_bayes::GaussianNbParams;
pub use scale::Standardizer;
pub use tree::{MaxFeatures, Splitter, TreeParams};

#[derive(Debug, Error, PartialEq)]
pub enum LearnerError {
    #[error("training labels contain a single class")]
    DegenerateTraining,
    #[error("{0} feature rows but {1} labels")]
    LengthMismatch(usize, usize),
    #[error("model expects {expected} input columns, got {found}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("non-finite values produced by `{0}`")]
    NonFiniteInput(String),
    #[error("invalid hyperparameter for `{id}`: {reason}")]
    InvalidHyperparameter { id: String, reason: String },
    #[error("invalid probability matrix: {0}")]
    InvalidProba(String),
}

/// Row-stochastic class-probability matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbaMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl ProbaMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self, LearnerError> {
        if values.len() != rows * cols {
            return Err(LearnerError::InvalidProba(format!(
                "{} values for {rows}x{cols}",
                values.len()
            )));
        }
        Ok(Self { rows, cols, values })
    }

    /// Clamp negatives to zero and rescale every row to sum to one.
    pub fn normalized(rows: usize, cols: usize, mut values: Vec<f64>) -> Result<Self, LearnerError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LearnerError::InvalidProba("non-finite entry".into()));
        }
        for row in values.chunks_mut(cols) {
            row.iter_mut().for_each(|v| *v = v.max(0.0));
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter_mut().for_each(|v| *v /= s);
            } else {
                row.iter_mut().for_each(|v| *v = 1.0 / cols as f64);
            }
        }
        Self::new(rows, cols, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    /// Most probable class per row; ties go to the lowest class id.
    pub fn argmax(&self) -> Vec<usize> {
        (0..self.rows).map(|r| tree::argmax(self.row(r))).collect()
    }
}

/// A fitted model.
pub trait Classifier: Send + Sync {
    fn class_count(&self) -> usize;
    fn input_width(&self) -> usize;
    fn predict_proba(&self, x: &FeatureMatrix) -> Result<ProbaMatrix, LearnerError>;
}

/// Something that can be fitted into a [`Classifier`].
pub trait Learner: Send + Sync + fmt::Debug {
    fn id(&self) -> &str;
    /// `seed` is mixed with any seed the learner carries itself.
    fn fit(
        &self,
        x: &FeatureMatrix,
        y: &LabelVector,
        seed: u64,
    ) -> Result<Box<dyn Classifier>, LearnerError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LearnerKind {
    LogisticRegression(LogisticParams),
    DecisionTree(TreeParams),
    RandomForest(ForestParams),
    ExtraTrees(ForestParams),
    Bagging(ForestParams),
    AdaBoost(AdaBoostParams),
    GradientBoosting(GradientBoostingParams),
    Knn(KnnParams),
    GaussianNb(GaussianNbParams),
    Mlp(MlpParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub id: String,
    pub kind: LearnerKind,
    pub seed: u64,
}

/// Fitted state shared by all in-crate learners: `rows x class_count`
/// probabilities, before normalization.
pub(crate) trait Fitted: Send + Sync {
    fn predict(&self, x: &FeatureMatrix) -> Vec<f64>;
}

pub struct TrainedModel {
    spec: LearnerSpec,
    class_count: usize,
    input_width: usize,
    state: Box<dyn Fitted>,
}

impl fmt::Debug for TrainedModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TrainedModel")
            .field("id", &self.spec.id)
            .field("class_count", &self.class_count)
            .field("input_width", &self.input_width)
            .finish_non_exhaustive()
    }
}

impl TrainedModel {
    pub fn spec(&self) -> &LearnerSpec {
        &self.spec
    }
}

impl Classifier for TrainedModel {
    fn class_count(&self) -> usize {
        self.class_count
    }

    fn input_width(&self) -> usize {
        self.input_width
    }

    fn predict_proba(&self, x: &FeatureMatrix) -> Result<ProbaMatrix, LearnerError> {
        if x.cols() != self.input_width {
            return Err(LearnerError::WidthMismatch {
                expected: self.input_width,
                found: x.cols(),
            });
        }
        let raw = self.state.predict(x);
        ProbaMatrix::normalized(x.rows(), self.class_count, raw)
            .map_err(|_| LearnerError::NonFiniteInput(self.spec.id.clone()))
    }
}

impl LearnerSpec {
    pub fn new(id: impl Into<String>, kind: LearnerKind) -> Self {
        Self {
            id: id.into(),
            kind,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), LearnerError> {
        let bad = |reason: &str| {
            Err(LearnerError::InvalidHyperparameter {
                id: self.id.clone(),
                reason: reason.into(),
            })
        };
        let tree_ok = |t: &TreeParams| t.max_depth != Some(0) && t.min_samples_leaf >= 1;
        match &self.kind {
            LearnerKind::LogisticRegression(p) => {
                if !(p.c > 0.0 && p.learning_rate > 0.0 && p.max_iter >= 1) {
                    return bad("C, learning rate and iterations must be positive");
                }
            }
            LearnerKind::DecisionTree(t) => {
                if !tree_ok(t) {
                    return bad("tree depth and leaf size must be at least 1");
                }
            }
            LearnerKind::RandomForest(p) | LearnerKind::ExtraTrees(p) | LearnerKind::Bagging(p) => {
                if p.n_estimators == 0 || !tree_ok(&p.tree) {
                    return bad("need at least one tree of depth >= 1");
                }
            }
            LearnerKind::AdaBoost(p) => {
                if p.n_estimators == 0 || p.learning_rate <= 0.0 || p.max_depth == 0 {
                    return bad("estimators, depth and learning rate must be positive");
                }
            }
            LearnerKind::GradientBoosting(p) => {
                if p.n_estimators == 0 || p.learning_rate <= 0.0 || p.max_depth == 0 {
                    return bad("estimators, depth and learning rate must be positive");
                }
            }
            LearnerKind::Knn(p) => {
                if p.k == 0 {
                    return bad("k must be at least 1");
                }
            }
            LearnerKind::GaussianNb(p) => {
                if p.var_smoothing < 0.0 {
                    return bad("var_smoothing must be non-negative");
                }
            }
            LearnerKind::Mlp(p) => {
                if p.hidden == 0 || p.epochs == 0 || p.learning_rate <= 0.0 {
                    return bad("hidden width, epochs and learning rate must be positive");
                }
            }
        }
        Ok(())
    }

    /// Fit with the spec's own seed mixed with `seed`.
    pub fn fit_model(
        &self,
        x: &FeatureMatrix,
        y: &LabelVector,
        seed: u64,
    ) -> Result<TrainedModel, LearnerError> {
        self.validate()?;
        if x.rows() != y.len() {
            return Err(LearnerError::LengthMismatch(x.rows(), y.len()));
        }
        if y.distinct() < 2 {
            return Err(LearnerError::DegenerateTraining);
        }
        let class_count = y.class_count();
        let mut rng = rng::derived_rng(self.seed, &[seed]);
        let labels = y.values();
        let state: Box<dyn Fitted> = match &self.kind {
            LearnerKind::LogisticRegression(p) => {
                Box::new(linear::Logistic::fit(x, labels, class_count, p))
            }
            LearnerKind::DecisionTree(p) => {
                Box::new(ensemble::Forest::single_tree(x, labels, class_count, *p, &mut rng))
            }
            LearnerKind::RandomForest(p) | LearnerKind::ExtraTrees(p) | LearnerKind::Bagging(p) => {
                Box::new(ensemble::Forest::fit(x, labels, class_count, p, &mut rng))
            }
            LearnerKind::AdaBoost(p) => {
                Box::new(boosting::AdaBoost::fit(x, labels, class_count, p, &mut rng))
            }
            LearnerKind::GradientBoosting(p) => {
                Box::new(boosting::GradientBoosting::fit(x, labels, class_count, p))
            }
            LearnerKind::Knn(p) => Box::new(knn::Knn::fit(x, labels, class_count, p)),
            LearnerKind::GaussianNb(p) => {
                Box::new(naive_bayes::GaussianNb::fit(x, labels, class_count, p))
            }
            LearnerKind::Mlp(p) => Box::new(mlp::Mlp::fit(x, labels, class_count, p, &mut rng)),
        };
        Ok(TrainedModel {
            spec: self.clone(),
            class_count,
            input_width: x.cols(),
            state,
        })
    }
}

impl Learner for LearnerSpec {
    fn id(&self) -> &str {
        &self.id
    }

    fn fit(
        &self,
        x: &FeatureMatrix,
        y: &LabelVector,
        seed: u64,
    ) -> Result<Box<dyn Classifier>, LearnerError> {
        Ok(Box::new(self.fit_model(x, y, seed)?))
    }
}

/// Fit `spec` using only its own seed.
pub fn fit(spec: &LearnerSpec, x: &FeatureMatrix, y: &LabelVector) -> Result<TrainedModel, LearnerError> {
    spec.fit_model(x, y, 0)
}

pub fn predict_proba(model: &dyn Classifier, x: &FeatureMatrix) -> Result<ProbaMatrix, LearnerError> {
    model.predict_proba(x)
}

/// Ordered model pool. Order is fixed for the life of a run.
#[derive(Debug, Clone)]
pub struct LearnerPool {
    members: Vec<Arc<dyn Learner>>,
}

impl LearnerPool {
    pub fn new(members: Vec<Arc<dyn Learner>>) -> Result<Self, LearnerError> {
        if members.is_empty() {
            return Err(LearnerError::InvalidHyperparameter {
                id: "<pool>".into(),
                reason: "pool must not be empty".into(),
            });
        }
        for (i, m) in members.iter().enumerate() {
            if members[..i].iter().any(|o| o.id() == m.id()) {
                return Err(LearnerError::InvalidHyperparameter {
                    id: m.id().to_owned(),
                    reason: "duplicate learner id".into(),
                });
            }
        }
        Ok(Self { members })
    }

    pub fn from_specs(specs: Vec<LearnerSpec>) -> Result<Self, LearnerError> {
        for s in &specs {
            s.validate()?;
        }
        Self::new(specs.into_iter().map(|s| Arc::new(s) as Arc<dyn Learner>).collect())
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn get(&self, index: usize) -> &Arc<dyn Learner> {
        &self.members[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<dyn Learner>> {
        self.members.iter()
    }

    pub fn ids(&self) -> Vec<String> {
        self.members.iter().map(|m| m.id().to_owned()).collect()
    }
}

/// The reference desk-scale pool.
///
/// Binary runs use all ten learners. Multi-class runs drop the two most
/// expensive ones there (gradient boosting fits one tree per class per round,
/// and the MLP's cost grows with its softmax width), leaving eight.
pub fn default_pool(task: Task) -> LearnerPool {
    let forest = |max_features, splitter, bootstrap, n_estimators| ForestParams {
        n_estimators,
        bootstrap,
        tree: TreeParams {
            max_features,
            splitter,
            ..TreeParams::default()
        },
    };
    let mut specs = vec![
        LearnerSpec::new("logreg", LearnerKind::LogisticRegression(LogisticParams::default())),
        LearnerSpec::new("tree", LearnerKind::DecisionTree(TreeParams::default())),
        LearnerSpec::new(
            "random_forest",
            LearnerKind::RandomForest(forest(MaxFeatures::Sqrt, Splitter::Best, true, 50)),
        ),
        LearnerSpec::new(
            "extra_trees",
            LearnerKind::ExtraTrees(forest(MaxFeatures::Sqrt, Splitter::Random, false, 50)),
        ),
        LearnerSpec::new(
            "bagging",
            LearnerKind::Bagging(forest(MaxFeatures::All, Splitter::Best, true, 10)),
        ),
        LearnerSpec::new("adaboost", LearnerKind::AdaBoost(AdaBoostParams::default())),
        LearnerSpec::new(
            "gradient_boosting",
            LearnerKind::GradientBoosting(GradientBoostingParams::default()),
        ),
        LearnerSpec::new("knn", LearnerKind::Knn(KnnParams::default())),
        LearnerSpec::new("gaussian_nb", LearnerKind::GaussianNb(GaussianNbParams::default())),
        LearnerSpec::new("mlp", LearnerKind::Mlp(MlpParams::default())),
    ];
    for (i, s) in specs.iter_mut().enumerate() {
        s.seed = i as u64;
    }
    if task == Task::MultiClass {
        specs.retain(|s| s.id != "gradient_boosting" && s.id != "mlp");
    }
    LearnerPool::from_specs(specs).expect("default pool is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_pool_shapes() {
        let b = default_pool(Task::Binary);
        let m = default_pool(Task::MultiClass);
        assert_eq!(b.len(), 10);
        assert_eq!(m.len(), 8);
        let bids = b.ids();
        let mut uniq = bids.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), 10);
        assert!(m.ids().iter().all(|id| bids.contains(id)));
        assert_eq!(default_pool(Task::Binary).ids(), bids);
    }

    #[test]
    fn invalid_hyperparameters_rejected() {
        let spec = LearnerSpec::new(
            "gb",
            LearnerKind::GradientBoosting(GradientBoostingParams {
                learning_rate: 0.0,
                ..GradientBoostingParams::default()
            }),
        );
        assert!(matches!(
            spec.validate(),
            Err(LearnerError::InvalidHyperparameter { .. })
        ));
        let spec = LearnerSpec::new("knn", LearnerKind::Knn(KnnParams { k: 0 }));
        assert!(spec.validate().is_err());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let s = LearnerSpec::new("a", LearnerKind::Knn(KnnParams::default()));
        assert!(LearnerPool::from_specs(vec![s.clone(), s]).is_err());
        assert!(LearnerPool::from_specs(vec![]).is_err());
    }

    #[test]
    fn normalization_makes_rows_stochastic() {
        let p = ProbaMatrix::normalized(2, 3, vec![1.0, 1.0, 2.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.row(0), &[0.25, 0.25, 0.5]);
        assert_eq!(p.row(1), &[1.0 / 3.0; 3]);
        assert_eq!(p.argmax(), vec![2, 0]);
    }
}
