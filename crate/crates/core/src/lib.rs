//! Recursive ensemble stacking.
//!
//! Each level trains the surviving models with inner cross-validation, blends
//! their out-of-fold class probabilities with the previous level's features,
//! optionally compresses the blended matrix, refits the models on it and then
//! prunes them against an adaptive percentile of their (optionally
//! noise-blurred) out-of-fold scores. A terminal stack-of-stacking step fits
//! the original pool on every level's features at once.

pub mod cli;
pub mod compress;
pub mod data;
pub mod engine;
pub mod learners;
pub mod metrics;
pub mod prune;
pub mod rng;
pub mod stats;

pub use data::{Dataset, FeatureMatrix, LabelVector, Task};
pub use engine::{run_experiment, ExperimentConfig, RunReport};
pub use learners::{default_pool, LearnerPool, LearnerSpec};
