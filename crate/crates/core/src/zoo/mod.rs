//! Grid-search collection of small 1-D convolutional classifiers.

pub mod grid;
pub mod layers;
pub mod network;
pub mod train;

use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use grid::{expand_grid, Activation, GridDomains, HyperParams};
pub use layers::LayerSpec;
pub use network::{accuracy, NetworkModel, PredictionVector};
pub use train::{gradient_check, train, GradCheck, TrainConfig, TrainLog};

use crate::error::Result;
use crate::seed::derive_seed;

pub const MANIFEST_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct ZooMember {
    pub grid_index: usize,
    pub model: NetworkModel,
    pub log: TrainLog,
}

impl ZooMember {
    pub fn id(&self) -> String {
        model_id(self.grid_index)
    }
}

pub fn model_id(grid_index: usize) -> String {
    format!("m{grid_index:03}")
}

/// Builds and trains one model per hyperparameter combination. Members train
/// independently on the shared data and come back in grid order.
pub fn train_zoo(
    grid: &[HyperParams],
    x: ArrayView2<f64>,
    labels: &[usize],
    n_classes: usize,
    cfg: &TrainConfig,
) -> Result<Vec<ZooMember>> {
    grid.par_iter()
        .enumerate()
        .map(|(i, hp)| {
            let init_seed = derive_seed(cfg.seed, &[0x1417, i as u64]);
            let mut model = NetworkModel::build(hp, x.ncols(), n_classes, init_seed)?;
            let member_cfg = TrainConfig {
                seed: derive_seed(cfg.seed, &[0x7a41, i as u64]),
                ..cfg.clone()
            };
            let log = train(&mut model, x, labels, &member_cfg)?;
            Ok(ZooMember {
                grid_index: i,
                model,
                log,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub grid_index: usize,
    pub model_id: String,
    pub hyperparams: Option<HyperParams>,
    pub seed: u64,
    pub param_count: usize,
    pub loss_curve: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZooManifest {
    pub format_version: u32,
    pub models: Vec<ManifestEntry>,
}

impl ZooManifest {
    pub fn from_members(members: &[ZooMember]) -> Self {
        ZooManifest {
            format_version: MANIFEST_FORMAT_VERSION,
            models: members
                .iter()
                .map(|m| ManifestEntry {
                    grid_index: m.grid_index,
                    model_id: m.id(),
                    hyperparams: m.model.hyperparams().cloned(),
                    seed: m.model.seed(),
                    param_count: m.model.param_count(),
                    loss_curve: m.log.epoch_losses.clone(),
                })
                .collect(),
        }
    }
}
