use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use nasirt::data::{generate_synthetic, load_csv, SpectralDataset, SyntheticSpec};
use nasirt::irt::FitConfig;
use nasirt::pipeline::{RoutingKind, RunConfig};
use nasirt::zoo::{GridDomains, TrainConfig};

pub const OUT_DIR_ENV: &str = "NASIRT_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "nasirt-out";

/// Experiment settings as read from a TOML file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub dataset: Option<PathBuf>,
    pub synthetic: Option<SyntheticSpec>,
    pub preset: Option<String>,
    pub predictions: Option<PathBuf>,
    pub folds: Option<Vec<f64>>,
    pub bootstrap_runs: Option<usize>,
    pub rank_size: Option<usize>,
    pub routing: Option<Vec<RoutingKind>>,
    pub single_cnn_epochs: Option<usize>,
    pub seed: Option<u64>,
    pub train: Option<TrainConfig>,
    pub fit: Option<FitConfig>,
    pub out_dir: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    /// TOML config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset CSV (feature columns then `label`).
    #[arg(long, conflicts_with = "synthetic")]
    pub data: Option<PathBuf>,
    /// Use the synthetic spectral dataset.
    #[arg(long)]
    pub synthetic: bool,
    /// Grid preset: `reduced`, `full`, or a path to a TOML grid file.
    #[arg(long)]
    pub preset: Option<String>,
    /// Training fractions, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub folds: Option<Vec<f64>>,
    /// Bootstrap runs per fold.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Rank size n.
    #[arg(long)]
    pub rank: Option<usize>,
    /// Routing kinds, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub routing: Option<Vec<RoutingKind>>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Epochs for the single-CNN baseline.
    #[arg(long)]
    pub single_epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Skip zoo training and start from these predictions.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Fit even when an item column is constant.
    #[arg(long)]
    pub waive_singularity_guard: bool,
    /// Parent directory for outputs.
    #[arg(long, env = OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSource {
    File { name: String, sha256: String },
    Synthetic(SyntheticSpec),
}

/// Fully resolved experiment. Its serialization names the output directory.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub dataset: DatasetSource,
    pub preset: String,
    pub predictions_sha256: Option<String>,
    pub run: RunConfig,
}

pub struct Experiment {
    pub resolved: Resolved,
    pub dataset: SpectralDataset,
    pub dataset_name: String,
    pub predictions: Option<PathBuf>,
    pub out_root: PathBuf,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn file_sha(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

fn grid_for(preset: &str) -> Result<GridDomains> {
    Ok(match preset {
        "reduced" => GridDomains::reduced(),
        "full" => GridDomains::full(),
        path => GridDomains::load(path).with_context(|| format!("cannot load grid {path}"))?,
    })
}

pub fn out_root(flag: Option<PathBuf>, file: Option<PathBuf>) -> PathBuf {
    flag.or(file)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

impl ExperimentArgs {
    /// Merges file and flags, loads the dataset and validates everything
    /// without touching the output directory.
    pub fn resolve(&self) -> Result<Experiment> {
        let file = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        if file.dataset.is_some() && file.synthetic.is_some() {
            bail!("config names both a dataset file and a synthetic spec");
        }
        let base = RunConfig::default();
        let mut train = file.train.clone().unwrap_or_default();
        if let Some(e) = self.epochs {
            train.epochs = e;
        }
        if let Some(b) = self.batch_size {
            train.batch_size = b;
        }
        if let Some(lr) = self.learning_rate {
            train.learning_rate = lr;
        }
        let mut fit = file.fit.clone().unwrap_or_default();
        if self.waive_singularity_guard {
            fit.waive_singularity_guard = true;
        }
        let seed = self.seed.or(file.seed).unwrap_or(base.seed);
        let preset = self
            .preset
            .clone()
            .or(file.preset.clone())
            .unwrap_or_else(|| "reduced".to_string());
        let run = RunConfig {
            folds: self
                .folds
                .clone()
                .or(file.folds.clone())
                .unwrap_or(base.folds),
            bootstrap_runs: self
                .runs
                .or(file.bootstrap_runs)
                .unwrap_or(base.bootstrap_runs),
            rank_size: self.rank.or(file.rank_size).unwrap_or(base.rank_size),
            routing: self
                .routing
                .clone()
                .or(file.routing.clone())
                .unwrap_or(base.routing),
            grid: grid_for(&preset)?,
            train,
            single_cnn_epochs: self.single_epochs.or(file.single_cnn_epochs),
            fit,
            seed,
        };
        run.validate()?;

        let data_path = if self.synthetic {
            None
        } else {
            self.data.clone().or(file.dataset.clone())
        };
        let (dataset, source, dataset_name) = match data_path {
            Some(path) => {
                let ds = load_csv(&path)
                    .with_context(|| format!("cannot load dataset {}", path.display()))?;
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "dataset".into());
                let source = DatasetSource::File {
                    name: name.clone(),
                    sha256: file_sha(&path)?,
                };
                (ds, source, name)
            }
            None => {
                let mut spec = file.synthetic.clone().unwrap_or_default();
                if let Some(s) = self.seed {
                    spec.seed = s;
                }
                spec.validate()?;
                let ds = generate_synthetic(&spec)?;
                (ds, DatasetSource::Synthetic(spec), "synthetic".to_string())
            }
        };
        let predictions = self.predictions.clone().or(file.predictions.clone());
        let predictions_sha256 = predictions.as_deref().map(file_sha).transpose()?;
        Ok(Experiment {
            resolved: Resolved {
                dataset: source,
                preset,
                predictions_sha256,
                run,
            },
            dataset,
            dataset_name,
            predictions,
            out_root: out_root(self.out_dir.clone(), file.out_dir),
        })
    }
}

impl Resolved {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).context("cannot serialize resolved config")
    }

    /// Output directory name: command plus the first 16 hex digits of the
    /// config hash.
    pub fn dir_name(&self, command: &str) -> Result<String> {
        let hash = sha256_hex(self.to_toml()?.as_bytes());
        Ok(format!("{command}-{}", &hash[..16]))
    }
}
