//! Feature compression back-ends and the schedule that decides when they run.

pub mod attention;
pub mod autoencoder;
mod net;
pub mod sfe;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DataError, FeatureMatrix, LabelVector};

pub use attention::{attention_select, AttentionSelector};
pub use autoencoder::{ae_fit_transform, AutoencoderModel, Depth};
pub use sfe::{sfe_select, SfeConfig};

#[derive(Debug, Error)]
pub enum CompressError {
    #[error("matrix has no rows or columns")]
    EmptyMatrix,
    #[error("compressor needs at least {needed} columns, got {found}")]
    WidthTooSmall { needed: usize, found: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Levels at which a periodic schedule fires.
pub const PERIODIC_LEVELS: [usize; 3] = [3, 6, 9];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    None,
    #[serde(rename = "each")]
    EachLevel,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sfe,
    Ae2,
    Ae3,
    Attention,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Sfe => "sfe",
            Method::Ae2 => "ae2",
            Method::Ae3 => "ae3",
            Method::Attention => "attention",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompressionPlan {
    pub schedule: Schedule,
    pub method: Method,
    #[serde(default)]
    pub sfe: SfeConfig,
}

impl CompressionPlan {
    pub fn none() -> Self {
        Self {
            schedule: Schedule::None,
            method: Method::Sfe,
            sfe: SfeConfig::default(),
        }
    }

    pub fn new(schedule: Schedule, method: Method) -> Self {
        Self {
            schedule,
            method,
            sfe: SfeConfig::default(),
        }
    }

    /// Whether compression runs at `level` (levels start at 1).
    pub fn fires_at(&self, level: usize) -> bool {
        match self.schedule {
            Schedule::None => false,
            Schedule::EachLevel => level >= 1,
            Schedule::Periodic => PERIODIC_LEVELS.contains(&level),
        }
    }
}

pub struct Compressed {
    pub train: FeatureMatrix,
    pub test: FeatureMatrix,
    /// Kept input columns for selecting methods; `None` for autoencoders.
    pub kept: Option<Vec<usize>>,
}

/// Run the plan's method fitted on the training side and apply it to both sides.
///
/// Autoencoders need two columns; on narrower input they pass the matrices
/// through unchanged, as does every method when it would return no column.
pub fn apply(
    plan: &CompressionPlan,
    level: usize,
    train: &FeatureMatrix,
    test: &FeatureMatrix,
    y: &LabelVector,
    seed: u64,
) -> Result<Compressed, CompressError> {
    let passthrough = || Compressed {
        train: train.clone(),
        test: test.clone(),
        kept: Some((0..train.cols()).collect()),
    };
    let method = plan.method;
    match method {
        Method::Sfe => {
            let r = sfe_select(train, test, y, &plan.sfe)?;
            Ok(Compressed {
                train: r.train,
                test: r.test,
                kept: Some(r.selected),
            })
        }
        Method::Ae2 | Method::Ae3 => {
            if train.cols() < 2 {
                return Ok(passthrough());
            }
            let depth = if method == Method::Ae2 {
                Depth::TwoLayer
            } else {
                Depth::ThreeLayer
            };
            let (_, tr, te) = ae_fit_transform(train, test, depth, level, seed)?;
            Ok(Compressed {
                train: tr,
                test: te,
                kept: None,
            })
        }
        Method::Attention => {
            if train.cols() < 2 {
                return Ok(passthrough());
            }
            let r = attention_select(train, test, y, seed)?;
            Ok(Compressed {
                train: r.train,
                test: r.test,
                kept: Some(r.selector.kept),
            })
        }
    }
}
