//! Mini-batch Adam training and a finite-difference gradient check.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::{cross_entropy, Gradients, NetworkModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            batch_size: 32,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::TrainConfig("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::TrainConfig("batch_size must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::TrainConfig(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::TrainConfig("Adam betas must lie in [0, 1)".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::TrainConfig("Adam epsilon must be positive".into()));
        }
        Ok(())
    }
}

/// Adam with bias-corrected moment estimates.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    step: i32,
    m: Gradients,
    v: Gradients,
}

impl Adam {
    pub fn new(model: &NetworkModel, cfg: &TrainConfig) -> Self {
        Adam {
            lr: cfg.learning_rate,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            epsilon: cfg.epsilon,
            step: 0,
            m: Gradients::zeros_like(model),
            v: Gradients::zeros_like(model),
        }
    }

    pub fn update(&mut self, model: &mut NetworkModel, grads: &Gradients) {
        self.step += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.step);
        let c2 = 1.0 - b2.powi(self.step);
        let step_size = self.lr / c1;
        let eps = self.epsilon;
        for (li, layer) in model.layers_mut().iter_mut().enumerate() {
            for (ti, p) in layer.params_mut().into_iter().enumerate() {
                let g = &grads.0[li][ti];
                let m = &mut self.m.0[li][ti];
                let v = &mut self.v.0[li][ti];
                for (((p, &g), m), v) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                    *m = b1 * *m + (1.0 - b1) * g;
                    *v = b2 * *v + (1.0 - b2) * g * g;
                    *p -= step_size * *m / ((*v / c2).sqrt() + eps);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    /// Mean mini-batch loss of each epoch.
    pub epoch_losses: Vec<f64>,
}

/// Minimizes softmax cross-entropy with Adam. Shuffling and dropout masks are
/// drawn from one generator seeded by `cfg.seed`, so the result is a pure
/// function of the inputs.
pub fn train(
    model: &mut NetworkModel,
    x: ArrayView2<f64>,
    labels: &[usize],
    cfg: &TrainConfig,
) -> Result<TrainLog> {
    cfg.validate()?;
    if x.nrows() == 0 {
        return Err(Error::TrainConfig("training set is empty".into()));
    }
    if labels.len() != x.nrows() {
        return Err(Error::TrainConfig(format!(
            "{} labels for {} rows",
            labels.len(),
            x.nrows()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= model.n_classes()) {
        return Err(Error::TrainConfig(format!(
            "label {bad} outside 0..{}",
            model.n_classes()
        )));
    }
    if x.ncols() != model.input_len() {
        return Err(Error::WidthMismatch {
            expected: model.input_len(),
            actual: x.ncols(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = Adam::new(model, cfg);
    let mut grads = Gradients::zeros_like(model);
    let mut order: Vec<usize> = (0..x.nrows()).collect();
    let mut log = TrainLog {
        epoch_losses: Vec::with_capacity(cfg.epochs),
    };
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut batches = 0;
        for (batch, idx) in order.chunks(cfg.batch_size).enumerate() {
            let xb = x.select(Axis(0), idx);
            let yb: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
            let fwd = model.forward_train(xb.view(), Some(&mut rng))?;
            let (loss, dlogits) = cross_entropy(&fwd.logits, &yb);
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch });
            }
            model.backward(&fwd, dlogits.view(), &mut grads);
            model.update_running_stats(&fwd);
            adam.update(model, &grads);
            total += loss;
            batches += 1;
        }
        log.epoch_losses.push(total / batches as f64);
    }
    Ok(log)
}

/// Training-mode loss with dropout disabled.
fn check_loss(model: &NetworkModel, x: &Array2<f64>, label: usize) -> f64 {
    let fwd = model
        .forward_train::<ChaCha8Rng>(x.view(), None)
        .expect("width checked");
    cross_entropy(&fwd.logits, &[label]).0
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub max_relative_error: f64,
    pub checked: usize,
    /// Analytic gradient, flattened in parameter order.
    pub analytic: Vec<f64>,
}

/// Floor on the relative-error denominator, so two gradients that are both
/// essentially zero are compared absolutely.
pub const GRAD_CHECK_FLOOR: f64 = 1e-6;
pub const GRAD_CHECK_SAMPLES: usize = 200;

/// Compares backpropagated gradients with central finite differences on a
/// random subsample of at least 200 weights (all of them when fewer exist).
/// Runs in training mode with dropout disabled.
pub fn gradient_check(
    model: &NetworkModel,
    instance: ArrayView1<f64>,
    label: usize,
    epsilon: f64,
) -> Result<GradCheck> {
    if !(1e-6..=1e-3).contains(&epsilon) {
        return Err(Error::Domain(format!(
            "epsilon {epsilon} outside [1e-6, 1e-3]"
        )));
    }
    if label >= model.n_classes() {
        return Err(Error::Domain(format!("label {label} out of range")));
    }
    let x = instance.to_owned().insert_axis(Axis(0));
    let fwd = model.forward_train::<ChaCha8Rng>(x.view(), None)?;
    let (_, dlogits) = cross_entropy(&fwd.logits, &[label]);
    let mut grads = Gradients::zeros_like(model);
    model.backward(&fwd, dlogits.view(), &mut grads);

    let mut locations = Vec::new();
    for (li, layer) in grads.0.iter().enumerate() {
        for (ti, t) in layer.iter().enumerate() {
            locations.extend((0..t.len()).map(|k| (li, ti, k)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed() ^ 0x6772_6164);
    if locations.len() > GRAD_CHECK_SAMPLES {
        locations.shuffle(&mut rng);
        locations.truncate(GRAD_CHECK_SAMPLES.max(locations.len() / 20));
    }

    let mut probe = model.clone();
    let mut max_err: f64 = 0.0;
    for &(li, ti, k) in &locations {
        let original = probe.layers()[li].params()[ti][k];
        probe.layers_mut()[li].params_mut()[ti][k] = original + epsilon;
        let plus = check_loss(&probe, &x, label);
        probe.layers_mut()[li].params_mut()[ti][k] = original - epsilon;
        let minus = check_loss(&probe, &x, label);
        probe.layers_mut()[li].params_mut()[ti][k] = original;
        let numeric = (plus - minus) / (2.0 * epsilon);
        let analytic = grads.0[li][ti][k];
        let denom = analytic.abs().max(numeric.abs()).max(GRAD_CHECK_FLOOR);
        max_err = max_err.max((analytic - numeric).abs() / denom);
    }
    Ok(GradCheck {
        max_relative_error: max_err,
        checked: locations.len(),
        analytic: grads.flat().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::grid::{Activation, HyperParams};
    use crate::zoo::layers::{Layer, LayerSpec};

    fn tiny(act: Activation, pool: usize) -> NetworkModel {
        let hp = HyperParams {
            conv_layers: 1,
            conv_filters: 2,
            kernel_size: 3,
            dense_layers: 1,
            dense_size: 4,
            dropout_rate: 0.0,
            maxpool_size: pool,
            activation: act,
        };
        NetworkModel::build(&hp, 12, 2, 17).unwrap()
    }

    fn signal(d: usize, phase: f64) -> Array2<f64> {
        Array2::from_shape_fn((1, d), |(_, j)| (j as f64 * 0.7 + phase).sin())
    }

    #[test]
    fn tiny_net_gradients_match() {
        for act in [Activation::LeakyRelu, Activation::Tanh] {
            for pool in [0, 2] {
                let m = tiny(act, pool);
                let x = signal(12, 0.3);
                let r = gradient_check(&m, x.row(0), 1, 1e-5).unwrap();
                assert!(
                    r.max_relative_error < 1e-4,
                    "{act:?} pool {pool}: {}",
                    r.max_relative_error
                );
                assert_eq!(r.checked, m.param_count().min(r.checked));
            }
        }
    }

    #[test]
    fn zero_input_kills_first_conv_weight_grads() {
        let m = tiny(Activation::Tanh, 0);
        let x = Array2::zeros((1, 12));
        let r = gradient_check(&m, x.row(0), 0, 1e-5).unwrap();
        let n_conv_w = match &m.layers()[0] {
            Layer::Conv1d(c) => c.weight.len(),
            _ => unreachable!(),
        };
        assert!(r.analytic[..n_conv_w].iter().all(|&g| g == 0.0));
    }

    #[test]
    fn epsilon_domain() {
        let m = tiny(Activation::Tanh, 0);
        let x = signal(12, 0.0);
        assert!(gradient_check(&m, x.row(0), 0, 1e-2).is_err());
    }

    #[test]
    fn epochs_zero_rejected() {
        let mut m = tiny(Activation::Tanh, 0);
        let x = signal(12, 0.0);
        let cfg = TrainConfig {
            epochs: 0,
            ..Default::default()
        };
        assert!(matches!(
            train(&mut m, x.view(), &[0], &cfg),
            Err(Error::TrainConfig(_))
        ));
    }

    #[test]
    fn learns_separable_toy() {
        let mut m = NetworkModel::from_specs(
            4,
            2,
            vec![
                LayerSpec::Dense { units: 8 },
                LayerSpec::Activation {
                    kind: Activation::Tanh,
                },
            ],
            3,
        )
        .unwrap();
        let x = Array2::from_shape_fn((40, 4), |(i, j)| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * (1.0 + j as f64 * 0.1) + (i as f64 * 0.013).sin() * 0.1
        });
        let y: Vec<usize> = (0..40).map(|i| i % 2).collect();
        let cfg = TrainConfig {
            epochs: 20,
            batch_size: 8,
            learning_rate: 1e-2,
            ..Default::default()
        };
        let before = m.loss(x.view(), &y).unwrap();
        let log = train(&mut m, x.view(), &y, &cfg).unwrap();
        assert_eq!(log.epoch_losses.len(), 20);
        assert!(m.loss(x.view(), &y).unwrap() < before);
        assert_eq!(m.accuracy(x.view(), &y).unwrap(), 1.0);
    }

    #[test]
    fn nan_input_reports_epoch_and_batch() {
        let mut m = tiny(Activation::Tanh, 0);
        let mut x = Array2::from_shape_fn((4, 12), |(i, j)| (i + j) as f64 * 0.1);
        x[[3, 0]] = f64::NAN;
        let cfg = TrainConfig {
            epochs: 1,
            batch_size: 4,
            ..Default::default()
        };
        assert!(matches!(
            train(&mut m, x.view(), &[0, 1, 0, 1], &cfg),
            Err(Error::NonFiniteLoss { epoch: 0, batch: 0 })
        ));
    }
}
