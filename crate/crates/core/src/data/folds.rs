use rand::seq::SliceRandom;

use super::{DataError, LabelVector};
use crate::rng;

/// Per-row fold assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    /// Row indices held out in `fold`.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    /// Row indices used for training when `fold` is held out.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }
}

/// Stratified k-fold assignment.
///
/// Rows of each class are shuffled and dealt round-robin across folds; the
/// dealing position carries over between classes so fold sizes stay within
/// one of each other.
pub fn stratified_folds(labels: &LabelVector, k: usize, seed: u64) -> Result<FoldPlan, DataError> {
    if k < 2 {
        return Err(DataError::TooFewFolds(k));
    }
    let counts = labels.class_counts();
    for (class_id, &c) in counts.iter().enumerate() {
        if c > 0 && c < k {
            return Err(DataError::ClassTooSmall { class_id, k });
        }
    }
    let mut rng = rng::rng(seed);
    let mut assignments = vec![0; labels.len()];
    let mut next = 0;
    for class in 0..labels.class_count() {
        let mut members: Vec<usize> = (0..labels.len())
            .filter(|&i| labels.values()[i] == class)
            .collect();
        members.shuffle(&mut rng);
        for i in members {
            assignments[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldPlan { k, assignments })
}
