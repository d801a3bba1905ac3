//! Seeded synthetic datasets used by tests and demos.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use super::{Dataset, FeatureMatrix, LabelVector};
use crate::rng;

fn build(rows: Vec<Vec<f64>>, labels: Vec<usize>, class_count: usize) -> Dataset {
    let features = FeatureMatrix::from_rows(&rows).expect("generated rows are rectangular");
    let labels = LabelVector::new(labels, class_count).expect("generated labels in range");
    Dataset::new(features, labels).expect("generated dataset is valid")
}

/// Isotropic Gaussian clusters, one per class, centred on the axes at
/// `±separation` (class `c` sits on axis `c / 2`). Classes are balanced.
pub fn blobs(n: usize, dims: usize, classes: usize, separation: f64, seed: u64) -> Dataset {
    assert!(dims >= classes.div_ceil(2), "not enough dimensions for the centres");
    let mut rng = rng::rng(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % classes;
        let mut row: Vec<f64> = (0..dims)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let sign = if class.is_multiple_of(2) { 1.0 } else { -1.0 };
        row[class / 2] += sign * separation;
        rows.push(row);
        labels.push(class);
    }
    build(rows, labels, classes)
}

/// Two concentric noisy rings in the plane plus `noise_dims` pure-noise
/// columns. Class 0 is the inner ring.
pub fn ring(n: usize, noise_dims: usize, seed: u64) -> Dataset {
    let mut rng = rng::rng(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % 2;
        let theta = rng.random::<f64>() * std::f64::consts::TAU;
        let noise: f64 = StandardNormal.sample(&mut rng);
        let radius = 1.0 + class as f64 + 0.3 * noise;
        let mut row = vec![radius * theta.cos(), radius * theta.sin()];
        row.extend((0..noise_dims).map(|_| -> f64 { StandardNormal.sample(&mut rng) }));
        rows.push(row);
        labels.push(class);
    }
    build(rows, labels, 2)
}

/// XOR quadrants on `[-1, 1]^2`; label 1 where `x0 * x1 > 0`.
pub fn xor(n: usize, seed: u64) -> Dataset {
    let mut rng = rng::rng(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    while rows.len() < n {
        let a = rng.random_range(-1.0..1.0);
        let b = rng.random_range(-1.0..1.0);
        if a * b == 0.0 {
            continue;
        }
        labels.push(usize::from(a * b > 0.0));
        rows.push(vec![a, b]);
    }
    build(rows, labels, 2)
}

/// Label depends only on column 0 (`x0 > 0`); the remaining columns are noise.
pub fn single_informative(n: usize, dims: usize, seed: u64) -> Dataset {
    let mut rng = rng::rng(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % 2;
        let mut row: Vec<f64> = (0..dims)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let magnitude: f64 = 0.25 + rng.random::<f64>();
        row[0] = if class == 1 { magnitude } else { -magnitude };
        rows.push(row);
        labels.push(class);
    }
    build(rows, labels, 2)
}
