use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grid::{Activation, HyperParams};
use super::layers::{Cache, Conv1d, Dense, Layer, LayerSpec, MaxPool, Norm, Shape};
use crate::error::{Error, Result};

/// Dropout rate of the benchmark network, which its reference description
/// leaves unstated.
pub const BENCHMARK_DROPOUT: f64 = 0.25;
pub const BENCHMARK_FILTERS: usize = 32;
pub const BENCHMARK_KERNEL: usize = 5;
pub const BENCHMARK_DENSE: usize = 1024;

/// Rows per chunk when running inference over a whole dataset.
const EVAL_CHUNK: usize = 64;

/// A feed-forward classifier: the hidden stack in `specs`, followed by a
/// dense output layer of width `n_classes` and a softmax.
#[derive(Debug, Clone)]
pub struct NetworkModel {
    input_len: usize,
    n_classes: usize,
    specs: Vec<LayerSpec>,
    layers: Vec<Layer>,
    hyperparams: Option<HyperParams>,
    seed: u64,
}

/// Gradient buffers laid out like [`NetworkModel::params`].
#[derive(Debug, Clone)]
pub struct Gradients(pub Vec<Vec<Vec<f64>>>);

impl Gradients {
    pub fn zeros_like(model: &NetworkModel) -> Self {
        Gradients(
            model
                .layers
                .iter()
                .map(|l| l.params().iter().map(|p| vec![0.0; p.len()]).collect())
                .collect(),
        )
    }

    pub fn flat(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().flatten().flatten().copied()
    }
}

pub struct TrainForward {
    pub logits: Array2<f64>,
    pub caches: Vec<Cache>,
}

impl NetworkModel {
    pub fn from_specs(
        input_len: usize,
        n_classes: usize,
        specs: Vec<LayerSpec>,
        seed: u64,
    ) -> Result<Self> {
        if input_len == 0 {
            return Err(Error::Architecture {
                layer: 0,
                kind: "input",
                message: "input length must be positive".into(),
            });
        }
        if n_classes < 2 {
            return Err(Error::Architecture {
                layer: specs.len(),
                kind: "dense",
                message: format!("need at least 2 classes, got {n_classes}"),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut shape = Shape {
            channels: 1,
            len: input_len,
        };
        let mut layers = Vec::with_capacity(specs.len() + 1);
        for (i, spec) in specs.iter().enumerate() {
            let arch = |message: String| Error::Architecture {
                layer: i,
                kind: spec.kind(),
                message,
            };
            let layer = match *spec {
                LayerSpec::Conv1d { filters, kernel } => {
                    if filters == 0 || kernel == 0 {
                        return Err(arch("filters and kernel must be positive".into()));
                    }
                    if kernel > shape.len {
                        return Err(arch(format!(
                            "kernel {kernel} exceeds input length {}",
                            shape.len
                        )));
                    }
                    let conv = Conv1d::new(shape, filters, kernel, &mut rng);
                    shape = conv.output();
                    Layer::Conv1d(conv)
                }
                LayerSpec::Norm => Layer::Norm(Norm::new(shape)),
                LayerSpec::Activation { kind } => Layer::Activation(kind),
                LayerSpec::MaxPool { size } => {
                    if size == 0 {
                        return Err(arch("pool size must be positive".into()));
                    }
                    let pool = MaxPool { input: shape, size };
                    if pool.output().len == 0 {
                        return Err(arch(format!(
                            "pooling length {} by {size} reaches zero",
                            shape.len
                        )));
                    }
                    shape = pool.output();
                    Layer::MaxPool(pool)
                }
                LayerSpec::Flatten => {
                    shape = Shape {
                        channels: 1,
                        len: shape.width(),
                    };
                    Layer::Flatten
                }
                LayerSpec::Dense { units } => {
                    if units == 0 {
                        return Err(arch("dense width must be positive".into()));
                    }
                    let dense = Dense::new(shape.width(), units, &mut rng);
                    shape = Shape {
                        channels: 1,
                        len: units,
                    };
                    Layer::Dense(dense)
                }
                LayerSpec::Dropout { rate } => {
                    if !(0.0..1.0).contains(&rate) {
                        return Err(arch(format!("dropout rate {rate} outside [0, 1)")));
                    }
                    Layer::Dropout(rate)
                }
            };
            layers.push(layer);
        }
        layers.push(Layer::Dense(Dense::new(shape.width(), n_classes, &mut rng)));
        Ok(NetworkModel {
            input_len,
            n_classes,
            specs,
            layers,
            hyperparams: None,
            seed,
        })
    }

    /// Grid member: `[conv -> norm -> act -> pool?] x conv_layers -> flatten ->
    /// [dense -> act -> dropout] x dense_layers -> dense(K)`.
    pub fn build(
        hp: &HyperParams,
        feature_count: usize,
        n_classes: usize,
        seed: u64,
    ) -> Result<Self> {
        let mut specs = Vec::new();
        for _ in 0..hp.conv_layers {
            specs.push(LayerSpec::Conv1d {
                filters: hp.conv_filters,
                kernel: hp.kernel_size,
            });
            specs.push(LayerSpec::Norm);
            specs.push(LayerSpec::Activation {
                kind: hp.activation,
            });
            if hp.maxpool_size > 0 {
                specs.push(LayerSpec::MaxPool {
                    size: hp.maxpool_size,
                });
            }
        }
        specs.push(LayerSpec::Flatten);
        for _ in 0..hp.dense_layers {
            specs.push(LayerSpec::Dense {
                units: hp.dense_size,
            });
            specs.push(LayerSpec::Activation {
                kind: hp.activation,
            });
            specs.push(LayerSpec::Dropout {
                rate: hp.dropout_rate,
            });
        }
        let mut model = Self::from_specs(feature_count, n_classes, specs, seed)?;
        model.hyperparams = Some(hp.clone());
        Ok(model)
    }

    /// Single-CNN baseline: conv(32, k=5) -> LeakyReLU -> dropout ->
    /// dense(1024) -> LeakyReLU -> dropout -> dense(K).
    pub fn benchmark_cnn(feature_count: usize, n_classes: usize, seed: u64) -> Result<Self> {
        let act = LayerSpec::Activation {
            kind: Activation::LeakyRelu,
        };
        let drop = LayerSpec::Dropout {
            rate: BENCHMARK_DROPOUT,
        };
        let specs = vec![
            LayerSpec::Conv1d {
                filters: BENCHMARK_FILTERS,
                kernel: BENCHMARK_KERNEL,
            },
            act.clone(),
            drop.clone(),
            LayerSpec::Flatten,
            LayerSpec::Dense {
                units: BENCHMARK_DENSE,
            },
            act,
            drop,
        ];
        Self::from_specs(feature_count, n_classes, specs, seed)
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn specs(&self) -> &[LayerSpec] {
        &self.specs
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn hyperparams(&self) -> Option<&HyperParams> {
        self.hyperparams.as_ref()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    pub fn params(&self) -> Vec<Vec<&[f64]>> {
        self.layers.iter().map(Layer::params).collect()
    }

    fn check_width(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.input_len {
            return Err(Error::WidthMismatch {
                expected: self.input_len,
                actual: x.ncols(),
            });
        }
        Ok(())
    }

    /// Inference-mode logits.
    pub fn logits(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_width(&x)?;
        let mut out = Array2::zeros((x.nrows(), self.n_classes));
        for (chunk, mut dst) in x
            .axis_chunks_iter(Axis(0), EVAL_CHUNK)
            .zip(out.axis_chunks_iter_mut(Axis(0), EVAL_CHUNK))
        {
            let mut h = chunk.to_owned();
            for layer in &self.layers {
                h = layer.forward_eval(h.view());
            }
            dst.assign(&h);
        }
        Ok(out)
    }

    /// Class probabilities, one row per instance.
    pub fn forward(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        Ok(softmax(&self.logits(x)?))
    }

    /// Training-mode pass: batch statistics in normalization layers, dropout
    /// only when an rng is supplied.
    pub fn forward_train<R: Rng>(
        &self,
        x: ArrayView2<f64>,
        mut rng: Option<&mut R>,
    ) -> Result<TrainForward> {
        self.check_width(&x)?;
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut h = x.to_owned();
        for layer in &self.layers {
            let (next, cache) = layer.forward_train(h.view(), rng.as_deref_mut());
            caches.push(cache);
            h = next;
        }
        Ok(TrainForward { logits: h, caches })
    }

    /// Backpropagates `dlogits` and overwrites `grads`.
    pub fn backward(&self, fwd: &TrainForward, dlogits: ArrayView2<f64>, grads: &mut Gradients) {
        let mut d = dlogits.to_owned();
        for (i, (layer, cache)) in self.layers.iter().zip(&fwd.caches).enumerate().rev() {
            match layer.backward(cache, d.view(), &mut grads.0[i], i > 0) {
                Some(next) => d = next,
                None => break,
            }
        }
    }

    pub fn update_running_stats(&mut self, fwd: &TrainForward) {
        for (layer, cache) in self.layers.iter_mut().zip(&fwd.caches) {
            if let (Layer::Norm(n), Cache::Norm(c)) = (layer, cache) {
                n.update_running(c);
            }
        }
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
        Ok(argmax_rows(&self.logits(x)?))
    }

    pub fn accuracy(&self, x: ArrayView2<f64>, labels: &[usize]) -> Result<f64> {
        let pred = self.predict(x)?;
        Ok(accuracy(&pred, labels))
    }

    /// Mean inference-mode cross-entropy.
    pub fn loss(&self, x: ArrayView2<f64>, labels: &[usize]) -> Result<f64> {
        Ok(cross_entropy(&self.logits(x)?, labels).0)
    }
}

pub fn softmax(logits: &Array2<f64>) -> Array2<f64> {
    let mut p = logits.clone();
    for mut row in p.axis_iter_mut(Axis(0)) {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
    p
}

/// Mean softmax cross-entropy and its gradient with respect to the logits.
pub fn cross_entropy(logits: &Array2<f64>, labels: &[usize]) -> (f64, Array2<f64>) {
    let n = logits.nrows() as f64;
    let mut grad = softmax(logits);
    let mut loss = 0.0;
    for (i, (row, &y)) in logits.axis_iter(Axis(0)).zip(labels).enumerate() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let lse = max + row.mapv(|v| (v - max).exp()).sum().ln();
        loss += lse - row[y];
        grad[[i, y]] -= 1.0;
    }
    grad /= n;
    (loss / n, grad)
}

/// Index of the largest entry per row; the lowest index wins ties.
pub fn argmax_rows(m: &Array2<f64>) -> Vec<usize> {
    m.axis_iter(Axis(0))
        .map(|row| {
            let mut best = 0;
            for (j, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

pub fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    if pred.is_empty() {
        return 0.0;
    }
    let hits = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    hits as f64 / pred.len() as f64
}

/// Per-class probability rows and predicted classes of one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionVector {
    pub model_id: String,
    pub predicted: Vec<usize>,
    pub probabilities: Array2<f64>,
}

impl PredictionVector {
    pub fn from_model(
        model_id: impl Into<String>,
        model: &NetworkModel,
        x: ArrayView2<f64>,
    ) -> Result<Self> {
        let probabilities = model.forward(x)?;
        Ok(PredictionVector {
            model_id: model_id.into(),
            predicted: argmax_rows(&probabilities),
            probabilities,
        })
    }

    /// Prediction-only vector; probabilities are one-hot.
    pub fn from_classes(model_id: impl Into<String>, predicted: Vec<usize>, k: usize) -> Self {
        let mut probabilities = Array2::zeros((predicted.len(), k));
        for (i, &c) in predicted.iter().enumerate() {
            probabilities[[i, c]] = 1.0;
        }
        PredictionVector {
            model_id: model_id.into(),
            predicted,
            probabilities,
        }
    }

    pub fn len(&self) -> usize {
        self.predicted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predicted.is_empty()
    }

    pub fn row_sums(&self) -> Array1<f64> {
        self.probabilities.sum_axis(Axis(1))
    }
}
