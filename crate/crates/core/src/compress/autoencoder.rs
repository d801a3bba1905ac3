//! Autoencoder compression to one-third of the input width.
//!
//! `TwoLayer`: `d -> ceil(d/3) -> d`. `ThreeLayer`: `d -> ceil(d/2) ->
//! ceil(d/3) -> ceil(d/2) -> d`. Hidden and latent units use tanh, the
//! reconstruction is linear. Inputs are standardized with training
//! statistics; the latent activations are the compressed features.

use ndarray::Array2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::net::{Activation, Adam, Dense, Network};
use super::CompressError;
use crate::data::{ColumnMeta, ColumnOrigin, FeatureMatrix};
use crate::learners::Standardizer;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Depth {
    TwoLayer,
    ThreeLayer,
}

impl Depth {
    pub fn tag(self) -> &'static str {
        match self {
            Depth::TwoLayer => "ae2",
            Depth::ThreeLayer => "ae3",
        }
    }
}

pub fn latent_width(d: usize) -> usize {
    d.div_ceil(3)
}

pub fn hidden_width(d: usize) -> usize {
    d.div_ceil(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl Default for AutoencoderConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            batch_size: 32,
            learning_rate: 0.01,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AutoencoderModel {
    scaler: Standardizer,
    net: Network,
    encoder_layers: usize,
    pub input_dim: usize,
    pub latent_dim: usize,
    pub depth: Depth,
}

impl AutoencoderModel {
    pub fn fit(
        x: &FeatureMatrix,
        depth: Depth,
        cfg: &AutoencoderConfig,
        seed: u64,
    ) -> Result<Self, CompressError> {
        let d = x.cols();
        if d < 2 {
            return Err(CompressError::WidthTooSmall { needed: 2, found: d });
        }
        if x.rows() == 0 {
            return Err(CompressError::EmptyMatrix);
        }
        let k = latent_width(d);
        let mut init = rng::derived_rng(seed, &[0]);
        let (layers, encoder_layers) = match depth {
            Depth::TwoLayer => (
                vec![
                    Dense::new(d, k, Activation::Tanh, &mut init),
                    Dense::new(k, d, Activation::Linear, &mut init),
                ],
                1,
            ),
            Depth::ThreeLayer => {
                let h = hidden_width(d);
                (
                    vec![
                        Dense::new(d, h, Activation::Tanh, &mut init),
                        Dense::new(h, k, Activation::Tanh, &mut init),
                        Dense::new(k, h, Activation::Tanh, &mut init),
                        Dense::new(h, d, Activation::Linear, &mut init),
                    ],
                    2,
                )
            }
        };
        let mut net = Network { layers };
        let scaler = Standardizer::fit(x);
        let xs = scaler.transform(x);
        train(&mut net, &xs, cfg, seed);
        Ok(Self {
            scaler,
            net,
            encoder_layers,
            input_dim: d,
            latent_dim: k,
            depth,
        })
    }

    pub fn encode(&self, x: &FeatureMatrix) -> Array2<f64> {
        self.net
            .forward_until(&self.scaler.transform(x), self.encoder_layers)
    }

    /// Reconstruction in original units.
    pub fn reconstruct(&self, x: &FeatureMatrix) -> Array2<f64> {
        let xs = self.scaler.transform(x);
        let out = self.net.forward_until(&xs, self.net.layers.len());
        self.scaler.inverse(&out)
    }

    /// Layer widths from input to reconstruction.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.input_dim];
        w.extend(self.net.layers.iter().map(|l| l.bias.len()));
        w
    }

    fn encoded_matrix(&self, x: &FeatureMatrix, level: usize) -> Result<FeatureMatrix, CompressError> {
        let z = self.encode(x);
        let meta = (0..self.latent_dim)
            .map(|j| ColumnMeta {
                name: format!("L{level}_{}_{j}", self.depth.tag()),
                origin: ColumnOrigin::Compressed {
                    level,
                    method: self.depth.tag().into(),
                },
            })
            .collect();
        Ok(FeatureMatrix::new(
            z.nrows(),
            self.latent_dim,
            z.into_raw_vec_and_offset().0,
            meta,
        )?)
    }
}

fn train(net: &mut Network, xs: &Array2<f64>, cfg: &AutoencoderConfig, seed: u64) {
    let n = xs.nrows();
    let mut adam = Adam::new(cfg.learning_rate);
    let mut slots: Vec<_> = net
        .layers
        .iter()
        .map(|l| (Adam::slot(&l.weights), Adam::slot(&l.bias)))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    let batch = cfg.batch_size.max(1);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng::derived_rng(seed, &[1, epoch as u64]));
        for chunk in order.chunks(batch) {
            let xb = xs.select(ndarray::Axis(0), chunk);
            let (_, grads) = net.mse_gradients(&xb, &xb);
            adam.tick();
            for ((layer, (gw, gb)), (sw, sb)) in net.layers.iter_mut().zip(&grads).zip(&mut slots) {
                adam.update(&mut layer.weights, gw, sw);
                adam.update(&mut layer.bias, gb, sb);
            }
        }
    }
}

/// Fit on `x_train`, encode both matrices with the frozen encoder.
pub fn ae_fit_transform(
    x_train: &FeatureMatrix,
    x_test: &FeatureMatrix,
    depth: Depth,
    level: usize,
    seed: u64,
) -> Result<(AutoencoderModel, FeatureMatrix, FeatureMatrix), CompressError> {
    ae_fit_transform_with(x_train, x_test, depth, level, seed, &AutoencoderConfig::default())
}

pub fn ae_fit_transform_with(
    x_train: &FeatureMatrix,
    x_test: &FeatureMatrix,
    depth: Depth,
    level: usize,
    seed: u64,
    cfg: &AutoencoderConfig,
) -> Result<(AutoencoderModel, FeatureMatrix, FeatureMatrix), CompressError> {
    if x_train.cols() != x_test.cols() {
        return Err(CompressError::ShapeMismatch(format!(
            "train width {} vs test width {}",
            x_train.cols(),
            x_test.cols()
        )));
    }
    let model = AutoencoderModel::fit(x_train, depth, cfg, seed)?;
    let train = model.encoded_matrix(x_train, level)?;
    let test = model.encoded_matrix(x_test, level)?;
    Ok((model, train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widths_follow_ceil_arithmetic() {
        assert_eq!(latent_width(9), 3);
        assert_eq!(hidden_width(12), 6);
        assert_eq!(latent_width(12), 4);
        assert_eq!(latent_width(2), 1);
    }

    #[test]
    fn rejects_single_column() {
        let x = FeatureMatrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        assert!(matches!(
            ae_fit_transform(&x, &x, Depth::TwoLayer, 1, 0),
            Err(CompressError::WidthTooSmall { needed: 2, found: 1 })
        ));
    }

    #[test]
    fn three_layer_shape() {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| (0..12).map(|j| ((i * 7 + j * 3) % 11) as f64).collect())
            .collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let cfg = AutoencoderConfig {
            epochs: 2,
            ..AutoencoderConfig::default()
        };
        let (model, train, test) = ae_fit_transform_with(&x, &x, Depth::ThreeLayer, 3, 1, &cfg).unwrap();
        assert_eq!(model.widths(), vec![12, 6, 4, 6, 12]);
        assert_eq!(train.cols(), 4);
        assert_eq!(train, test);
        assert!(matches!(
            train.column_meta()[0].origin,
            ColumnOrigin::Compressed { level: 3, .. }
        ));
    }
}
