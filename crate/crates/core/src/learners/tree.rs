//! CART trees: weighted Gini classification trees (best or random splits)
//! and squared-error regression trees for gradient boosting.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::rng::Rng;

/// Number of candidate features examined per split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MaxFeatures {
    All,
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        let k = match self {
            MaxFeatures::All => n_features,
            MaxFeatures::Sqrt => (n_features as f64).sqrt().ceil() as usize,
            MaxFeatures::Count(k) => k,
        };
        k.clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Splitter {
    Best,
    /// One uniformly drawn threshold per candidate feature.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub splitter: Splitter,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: MaxFeatures::All,
            splitter: Splitter::Best,
        }
    }
}

/// Row-major training table borrowed by the builders.
#[derive(Clone, Copy)]
pub struct Table<'a> {
    pub values: &'a [f64],
    pub n_features: usize,
}

impl Table<'_> {
    #[inline]
    fn at(&self, row: usize, feature: usize) -> f64 {
        self.values[row * self.n_features + feature]
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
enum Node<L> {
    Leaf(L),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

fn descend<'n, L>(nodes: &'n [Node<L>], row: &[f64]) -> &'n L {
    let mut i = 0;
    loop {
        match &nodes[i] {
            Node::Leaf(l) => return l,
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => i = if row[*feature] <= *threshold { *left } else { *right },
        }
    }
}

/// Classification tree; leaves hold weighted class counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassificationTree {
    nodes: Vec<Node<Vec<f64>>>,
    class_count: usize,
}

fn gini(counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total) * (c / total)).sum::<f64>()
}

struct ClassBuilder<'a> {
    table: Table<'a>,
    labels: &'a [usize],
    weights: &'a [f64],
    class_count: usize,
    params: TreeParams,
    rng: &'a mut Rng,
    nodes: Vec<Node<Vec<f64>>>,
    order: Vec<usize>,
}

impl ClassificationTree {
    /// Fit on `rows` (duplicates allowed, as in a bootstrap sample) with
    /// per-row `weights` indexed by absolute row id.
    pub fn fit(
        table: Table<'_>,
        labels: &[usize],
        weights: &[f64],
        rows: &[usize],
        class_count: usize,
        params: TreeParams,
        rng: &mut Rng,
    ) -> Self {
        let mut builder = ClassBuilder {
            table,
            labels,
            weights,
            class_count,
            params,
            rng,
            nodes: Vec::new(),
            order: Vec::new(),
        };
        let mut rows = rows.to_vec();
        builder.grow(&mut rows, 0);
        ClassificationTree {
            nodes: builder.nodes,
            class_count,
        }
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// Weighted class counts of the leaf reached by `row`.
    pub fn leaf_counts(&self, row: &[f64]) -> &[f64] {
        descend(&self.nodes, row)
    }

    /// Laplace-smoothed leaf frequencies.
    pub fn smoothed_proba(&self, row: &[f64]) -> Vec<f64> {
        let counts = self.leaf_counts(row);
        let total: f64 = counts.iter().sum::<f64>() + self.class_count as f64;
        counts.iter().map(|c| (c + 1.0) / total).collect()
    }

    pub fn predict_class(&self, row: &[f64]) -> usize {
        argmax(self.leaf_counts(row))
    }

    pub fn depth(&self) -> usize {
        fn go<L>(nodes: &[Node<L>], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

impl ClassBuilder<'_> {
    fn counts(&self, rows: &[usize]) -> Vec<f64> {
        let mut c = vec![0.0; self.class_count];
        for &r in rows {
            c[self.labels[r]] += self.weights[r];
        }
        c
    }

    fn grow(&mut self, rows: &mut [usize], depth: usize) -> usize {
        let counts = self.counts(rows);
        let total: f64 = counts.iter().sum();
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(counts.clone()));

        let pure = counts.iter().filter(|&&c| c > 0.0).count() <= 1;
        let depth_reached = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_reached || rows.len() < self.params.min_samples_split || total <= 0.0 {
            return id;
        }
        let Some((feature, threshold)) = self.find_split(rows, &counts, total) else {
            return id;
        };
        let table = self.table;
        let mut split = 0;
        for i in 0..rows.len() {
            if table.at(rows[i], feature) <= threshold {
                rows.swap(i, split);
                split += 1;
            }
        }
        let (l, r) = rows.split_at_mut(split);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }

    fn find_split(&mut self, rows: &[usize], counts: &[f64], total: f64) -> Option<(usize, f64)> {
        let n_features = self.table.n_features;
        let wanted = self.params.max_features.resolve(n_features);
        let mut features: Vec<usize> = (0..n_features).collect();
        if wanted < n_features || self.params.splitter == Splitter::Random {
            features.shuffle(self.rng);
        }
        let parent = gini(counts, total) * total;
        let min_leaf = self.params.min_samples_leaf.max(1);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut examined = 0;
        for &f in &features {
            if examined >= wanted {
                break;
            }
            let candidate = match self.params.splitter {
                Splitter::Best => self.best_threshold(rows, f, counts, total, min_leaf),
                Splitter::Random => self.random_threshold(rows, f, total, min_leaf),
            };
            let Some((impurity, threshold)) = candidate else {
                // constant at this node; does not count toward max_features
                continue;
            };
            examined += 1;
            if impurity < parent - 1e-12 && best.is_none_or(|(b, _, _)| impurity < b) {
                best = Some((impurity, f, threshold));
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    /// Lowest weighted child impurity over midpoints; `None` if constant.
    fn best_threshold(
        &mut self,
        rows: &[usize],
        f: usize,
        counts: &[f64],
        total: f64,
        min_leaf: usize,
    ) -> Option<(f64, f64)> {
        let table = self.table;
        self.order.clear();
        self.order.extend_from_slice(rows);
        self.order
            .sort_by(|&a, &b| table.at(a, f).total_cmp(&table.at(b, f)));
        let first = table.at(self.order[0], f);
        let last = table.at(self.order[self.order.len() - 1], f);
        if first == last {
            return None;
        }
        let mut left = vec![0.0; self.class_count];
        let mut left_w = 0.0;
        let mut best: Option<(f64, f64)> = None;
        let n = self.order.len();
        for i in 0..n - 1 {
            let r = self.order[i];
            left[self.labels[r]] += self.weights[r];
            left_w += self.weights[r];
            let v = table.at(r, f);
            let next = table.at(self.order[i + 1], f);
            if v == next || i + 1 < min_leaf || n - i - 1 < min_leaf {
                continue;
            }
            let right_w = total - left_w;
            let mut left_sq = 0.0;
            let mut right_sq = 0.0;
            for (c, l) in counts.iter().zip(&left) {
                left_sq += l * l;
                right_sq += (c - l) * (c - l);
            }
            // weighted gini: w * (1 - sum p^2) = w - sum c^2 / w
            let left_imp = if left_w > 0.0 { left_w - left_sq / left_w } else { 0.0 };
            let imp = left_imp + if right_w > 0.0 {
                right_w - right_sq / right_w
            } else {
                0.0
            };
            if best.is_none_or(|(b, _)| imp < b) {
                let mut threshold = v + (next - v) / 2.0;
                if threshold >= next {
                    threshold = v;
                }
                best = Some((imp, threshold));
            }
        }
        best
    }

    fn random_threshold(
        &mut self,
        rows: &[usize],
        f: usize,
        total: f64,
        min_leaf: usize,
    ) -> Option<(f64, f64)> {
        let table = self.table;
        let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
            let v = table.at(r, f);
            (lo.min(v), hi.max(v))
        });
        if lo == hi {
            return None;
        }
        let mut threshold = self.rng.random_range(lo..hi);
        if threshold >= hi {
            threshold = lo;
        }
        let mut left = vec![0.0; self.class_count];
        let mut right = vec![0.0; self.class_count];
        let mut n_left = 0;
        for &r in rows {
            let w = self.weights[r];
            if table.at(r, f) <= threshold {
                left[self.labels[r]] += w;
                n_left += 1;
            } else {
                right[self.labels[r]] += w;
            }
        }
        if n_left < min_leaf || rows.len() - n_left < min_leaf {
            return None;
        }
        let lw: f64 = left.iter().sum();
        let rw = total - lw;
        Some((gini(&left, lw) * lw + gini(&right, rw) * rw, threshold))
    }
}

/// Squared-error regression tree whose leaf values come from a callback over
/// the leaf's rows (Newton steps in gradient boosting).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<Node<f64>>,
}

impl RegressionTree {
    pub fn fit(
        table: Table<'_>,
        target: &[f64],
        rows: &[usize],
        max_depth: usize,
        min_samples_leaf: usize,
        leaf_value: &dyn Fn(&[usize]) -> f64,
    ) -> Self {
        let mut tree = RegressionTree { nodes: Vec::new() };
        let mut rows = rows.to_vec();
        let mut order = Vec::new();
        tree.grow(
            table,
            target,
            &mut rows,
            0,
            max_depth,
            min_samples_leaf.max(1),
            leaf_value,
            &mut order,
        );
        tree
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        *descend(&self.nodes, row)
    }

    #[allow(clippy::too_many_arguments)]
    fn grow(
        &mut self,
        table: Table<'_>,
        target: &[f64],
        rows: &mut [usize],
        depth: usize,
        max_depth: usize,
        min_leaf: usize,
        leaf_value: &dyn Fn(&[usize]) -> f64,
        order: &mut Vec<usize>,
    ) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(leaf_value(rows)));
        if depth >= max_depth || rows.len() < 2 * min_leaf {
            return id;
        }
        let n = rows.len();
        let sum: f64 = rows.iter().map(|&r| target[r]).sum();
        let parent = sum * sum / n as f64;
        let mut best: Option<(f64, usize, f64)> = None;
        for f in 0..table.n_features {
            order.clear();
            order.extend_from_slice(rows);
            order.sort_by(|&a, &b| table.at(a, f).total_cmp(&table.at(b, f)));
            let mut left_sum = 0.0;
            for i in 0..n - 1 {
                left_sum += target[order[i]];
                let v = table.at(order[i], f);
                let next = table.at(order[i + 1], f);
                let n_left = i + 1;
                if v == next || n_left < min_leaf || n - n_left < min_leaf {
                    continue;
                }
                let right_sum = sum - left_sum;
                // maximise between-child sum of squares
                let score = left_sum * left_sum / n_left as f64
                    + right_sum * right_sum / (n - n_left) as f64;
                if score > parent + 1e-12 && best.is_none_or(|(b, _, _)| score > b) {
                    let mut threshold = v + (next - v) / 2.0;
                    if threshold >= next {
                        threshold = v;
                    }
                    best = Some((score, f, threshold));
                }
            }
        }
        let Some((_, feature, threshold)) = best else {
            return id;
        };
        let mut split = 0;
        for i in 0..rows.len() {
            if table.at(rows[i], feature) <= threshold {
                rows.swap(i, split);
                split += 1;
            }
        }
        let (l, r) = rows.split_at_mut(split);
        let left = self.grow(table, target, l, depth + 1, max_depth, min_leaf, leaf_value, order);
        let right = self.grow(table, target, r, depth + 1, max_depth, min_leaf, leaf_value, order);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}
