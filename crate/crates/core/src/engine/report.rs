use serde::{Deserialize, Serialize};

use crate::compress::Method;
use crate::data::Task;
use crate::metrics::MetricsRecord;
use crate::prune::PruneOutcome;

/// Result of one model at one level of one outer fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResult {
    pub model_id: String,
    pub metrics: MetricsRecord,
    /// Pruning score from out-of-fold predictions; absent at level 0.
    pub oof_score: Option<f64>,
    /// Wall-clock of every fit and prediction this model made at this level.
    pub seconds: f64,
}

/// Audit entry for a compression step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressionEvent {
    pub method: Method,
    pub width_before: usize,
    pub width_after: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: usize,
    /// Width of the level's training matrix after any compression.
    pub feature_count: usize,
    /// Width straight after blending (equals `feature_count` at level 0).
    pub blended_width: usize,
    pub compression: Option<CompressionEvent>,
    /// One entry per model evaluated at this level, in pool order.
    pub models: Vec<ModelResult>,
    pub prune: Option<PruneOutcome>,
    /// Models retained by this level's pruning (the whole pool at level 0).
    pub survivors: Vec<String>,
    pub halted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    /// Levels `0..=last`, contiguous.
    pub levels: Vec<LevelRecord>,
    /// Width of the stack-of-stacking training matrix.
    pub stack_width: usize,
    pub stack_of_stack: Vec<ModelResult>,
}

impl FoldReport {
    /// Level at which pruning halted the recursion, if it did.
    pub fn halted_at(&self) -> Option<usize> {
        self.levels.iter().find(|l| l.halted).map(|l| l.level)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetDescriptor {
    pub rows: usize,
    pub cols: usize,
    pub classes: usize,
    pub task: Task,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub dataset: DatasetDescriptor,
    pub pool: Vec<String>,
    pub folds: Vec<FoldReport>,
}
