use serde::{Deserialize, Serialize};

use super::Fitted;
use crate::data::FeatureMatrix;

/// Uniform-vote k-nearest neighbours under Euclidean distance. Distance ties
/// are broken by training row order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self { k: 5 }
    }
}

pub(crate) struct Knn {
    train: FeatureMatrix,
    labels: Vec<usize>,
    class_count: usize,
    k: usize,
}

impl Knn {
    pub fn fit(x: &FeatureMatrix, y: &[usize], class_count: usize, params: &KnnParams) -> Self {
        Self {
            train: x.clone(),
            labels: y.to_vec(),
            class_count,
            k: params.k.min(x.rows()),
        }
    }
}

impl Fitted for Knn {
    fn predict(&self, x: &FeatureMatrix) -> Vec<f64> {
        let mut out = vec![0.0; x.rows() * self.class_count];
        let mut dist: Vec<(f64, usize)> = Vec::with_capacity(self.train.rows());
        for (r, dst) in out.chunks_mut(self.class_count).enumerate() {
            let q = x.row(r);
            dist.clear();
            dist.extend((0..self.train.rows()).map(|i| {
                let d: f64 = self
                    .train
                    .row(i)
                    .iter()
                    .zip(q)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (d, i)
            }));
            dist.select_nth_unstable_by(self.k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for &(_, i) in &dist[..self.k] {
                dst[self.labels[i]] += 1.0 / self.k as f64;
            }
        }
        out
    }
}
