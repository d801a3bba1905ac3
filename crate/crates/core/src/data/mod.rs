//! Dataset ingestion, encoding and stratified fold planning.

mod folds;
mod load;
mod matrix;
pub mod synthetic;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use folds::{stratified_folds, FoldPlan};
pub use load::{load_csv, load_csv_reader};
pub use matrix::{ColumnMeta, ColumnOrigin, FeatureMatrix};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("label column `{0}` not found in header")]
    MissingLabelColumn(String),
    #[error("declared categorical column `{0}` not found in header")]
    MissingColumn(String),
    #[error("cannot parse cell at data row {row}, column `{col}`")]
    UnparseableCell { row: usize, col: String },
    #[error("dataset has fewer than two distinct labels")]
    SingleClassDataset,
    #[error("class {class_id} has fewer members than the {k} folds requested")]
    ClassTooSmall { class_id: usize, k: usize },
    #[error("fold count must be at least 2, got {0}")]
    TooFewFolds(usize),
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },
    #[error("invalid labels: {0}")]
    InvalidLabels(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Binary,
    MultiClass,
}

impl Task {
    pub fn for_class_count(class_count: usize) -> Self {
        if class_count == 2 {
            Task::Binary
        } else {
            Task::MultiClass
        }
    }
}

/// Integer class ids in `[0, class_count)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    values: Vec<usize>,
    class_count: usize,
}

impl LabelVector {
    pub fn new(values: Vec<usize>, class_count: usize) -> Result<Self, DataError> {
        if let Some(bad) = values.iter().find(|&&v| v >= class_count) {
            return Err(DataError::InvalidLabels(format!(
                "label {bad} outside [0, {class_count})"
            )));
        }
        Ok(Self {
            values,
            class_count,
        })
    }

    /// Infer `class_count` as `max + 1`.
    pub fn from_values(values: Vec<usize>) -> Self {
        let class_count = values.iter().max().map_or(0, |m| m + 1);
        Self {
            values,
            class_count,
        }
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count];
        for &v in &self.values {
            counts[v] += 1;
        }
        counts
    }

    /// Number of distinct classes actually present.
    pub fn distinct(&self) -> usize {
        self.class_counts().iter().filter(|&&c| c > 0).count()
    }

    pub fn select(&self, indices: &[usize]) -> LabelVector {
        LabelVector {
            values: indices.iter().map(|&i| self.values[i]).collect(),
            class_count: self.class_count,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub features: FeatureMatrix,
    pub labels: LabelVector,
    pub task: Task,
    /// Original label values, indexed by class id.
    pub class_names: Vec<String>,
}

impl Dataset {
    pub fn new(features: FeatureMatrix, labels: LabelVector) -> Result<Self, DataError> {
        if features.rows() != labels.len() {
            return Err(DataError::ShapeMismatch {
                expected: format!("{} labels", features.rows()),
                found: format!("{}", labels.len()),
            });
        }
        let counts = labels.class_counts();
        if counts.len() < 2 {
            return Err(DataError::SingleClassDataset);
        }
        if let Some(missing) = counts.iter().position(|&c| c == 0) {
            return Err(DataError::InvalidLabels(format!(
                "class {missing} has no members"
            )));
        }
        let class_count = labels.class_count();
        Ok(Self {
            features,
            labels,
            task: Task::for_class_count(class_count),
            class_names: (0..class_count).map(|c| c.to_string()).collect(),
        })
    }

    pub fn class_count(&self) -> usize {
        self.labels.class_count()
    }
}
