//! Averaged tree ensembles: single CART trees, random forests, extra trees
//! and bagged trees share one implementation.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::tree::{ClassificationTree, Table, TreeParams};
use super::Fitted;
use crate::data::FeatureMatrix;
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_estimators: usize,
    /// Draw a bootstrap sample per tree; otherwise every tree sees all rows.
    pub bootstrap: bool,
    pub tree: TreeParams,
}

pub(crate) struct Forest {
    trees: Vec<ClassificationTree>,
    class_count: usize,
}

impl Forest {
    pub fn single_tree(
        x: &FeatureMatrix,
        y: &[usize],
        class_count: usize,
        params: TreeParams,
        rng: &mut Rng,
    ) -> Self {
        let p = ForestParams {
            n_estimators: 1,
            bootstrap: false,
            tree: params,
        };
        Self::fit(x, y, class_count, &p, rng)
    }

    pub fn fit(
        x: &FeatureMatrix,
        y: &[usize],
        class_count: usize,
        params: &ForestParams,
        rng: &mut Rng,
    ) -> Self {
        let n = x.rows();
        let table = Table {
            values: x.values(),
            n_features: x.cols(),
        };
        let weights = vec![1.0; n];
        let all: Vec<usize> = (0..n).collect();
        let trees = (0..params.n_estimators)
            .map(|_| {
                let rows = if params.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    all.clone()
                };
                ClassificationTree::fit(table, y, &weights, &rows, class_count, params.tree, rng)
            })
            .collect();
        Self { trees, class_count }
    }
}

impl Fitted for Forest {
    fn predict(&self, x: &FeatureMatrix) -> Vec<f64> {
        let mut out = vec![0.0; x.rows() * self.class_count];
        for (r, dst) in out.chunks_mut(self.class_count).enumerate() {
            let row = x.row(r);
            for t in &self.trees {
                for (d, p) in dst.iter_mut().zip(t.smoothed_proba(row)) {
                    *d += p;
                }
            }
            let k = self.trees.len() as f64;
            dst.iter_mut().for_each(|d| *d /= k);
        }
        out
    }
}
