//! Hyperparameter grid for the classifier zoo.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    LeakyRelu,
    Tanh,
}

impl Activation {
    /// Negative slope used by the leaky variant.
    pub const LEAKY_SLOPE: f64 = 0.3;
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activation::LeakyRelu => f.write_str("leaky_relu"),
            Activation::Tanh => f.write_str("tanh"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub conv_layers: usize,
    pub conv_filters: usize,
    pub kernel_size: usize,
    pub dense_layers: usize,
    pub dense_size: usize,
    pub dropout_rate: f64,
    /// 0 means no pooling layer.
    pub maxpool_size: usize,
    pub activation: Activation,
}

impl fmt::Display for HyperParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "conv{}x{}k{}-dense{}x{}-drop{}-pool{}-{}",
            self.conv_layers,
            self.conv_filters,
            self.kernel_size,
            self.dense_layers,
            self.dense_size,
            self.dropout_rate,
            self.maxpool_size,
            self.activation
        )
    }
}

/// Value domains, one per hyperparameter. Field order is the expansion order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDomains {
    pub conv_layers: Vec<usize>,
    pub conv_filters: Vec<usize>,
    pub kernel_size: Vec<usize>,
    pub dense_layers: Vec<usize>,
    pub dense_size: Vec<usize>,
    pub dropout_rate: Vec<f64>,
    pub maxpool_size: Vec<usize>,
    pub activation: Vec<Activation>,
}

impl Default for GridDomains {
    fn default() -> Self {
        GridDomains::reduced()
    }
}

impl GridDomains {
    /// The 384-combination grid.
    pub fn full() -> Self {
        GridDomains {
            conv_layers: vec![1, 2],
            conv_filters: vec![8, 32, 128],
            kernel_size: vec![8, 16],
            dense_layers: vec![1, 2],
            dense_size: vec![128, 1024],
            dropout_rate: vec![0.0, 0.4],
            maxpool_size: vec![0, 4],
            activation: vec![Activation::LeakyRelu, Activation::Tanh],
        }
    }

    /// Eight-model preset for quick runs.
    pub fn reduced() -> Self {
        GridDomains {
            conv_layers: vec![1],
            conv_filters: vec![8, 32],
            kernel_size: vec![8],
            dense_layers: vec![1],
            dense_size: vec![128],
            dropout_rate: vec![0.0],
            maxpool_size: vec![0, 4],
            activation: vec![Activation::LeakyRelu, Activation::Tanh],
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Grid(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn cardinality(&self) -> usize {
        self.conv_layers.len()
            * self.conv_filters.len()
            * self.kernel_size.len()
            * self.dense_layers.len()
            * self.dense_size.len()
            * self.dropout_rate.len()
            * self.maxpool_size.len()
            * self.activation.len()
    }

    fn check(&self) -> Result<()> {
        let empty = [
            ("conv_layers", self.conv_layers.is_empty()),
            ("conv_filters", self.conv_filters.is_empty()),
            ("kernel_size", self.kernel_size.is_empty()),
            ("dense_layers", self.dense_layers.is_empty()),
            ("dense_size", self.dense_size.is_empty()),
            ("dropout_rate", self.dropout_rate.is_empty()),
            ("maxpool_size", self.maxpool_size.is_empty()),
            ("activation", self.activation.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::Grid(format!("domain `{name}` is empty")));
        }
        let zero = |v: &[usize]| v.contains(&0);
        if zero(&self.conv_filters) || zero(&self.kernel_size) || zero(&self.dense_size) {
            return Err(Error::Grid(
                "filters, kernel and dense sizes must be positive".into(),
            ));
        }
        if self.dropout_rate.iter().any(|r| !(0.0..1.0).contains(r)) {
            return Err(Error::Grid("dropout rates must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Cartesian product of the domains. The first field varies slowest and the
/// activation fastest; values keep their listed order.
pub fn expand_grid(grid: &GridDomains) -> Result<Vec<HyperParams>> {
    grid.check()?;
    let mut out = Vec::with_capacity(grid.cardinality());
    for &conv_layers in &grid.conv_layers {
        for &conv_filters in &grid.conv_filters {
            for &kernel_size in &grid.kernel_size {
                for &dense_layers in &grid.dense_layers {
                    for &dense_size in &grid.dense_size {
                        for &dropout_rate in &grid.dropout_rate {
                            for &maxpool_size in &grid.maxpool_size {
                                for &activation in &grid.activation {
                                    out.push(HyperParams {
                                        conv_layers,
                                        conv_filters,
                                        kernel_size,
                                        dense_layers,
                                        dense_size,
                                        dropout_rate,
                                        maxpool_size,
                                        activation,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_grid_has_384() {
        let g = expand_grid(&GridDomains::full()).unwrap();
        assert_eq!(g.len(), 384);
        assert_eq!(g[0].activation, Activation::LeakyRelu);
        assert_eq!(g[1].activation, Activation::Tanh);
        assert_eq!(g[383].conv_layers, 2);
    }

    #[test]
    fn reduced_grid_has_8() {
        assert_eq!(expand_grid(&GridDomains::reduced()).unwrap().len(), 8);
    }

    #[test]
    fn single_values_give_one() {
        let g = GridDomains {
            conv_layers: vec![1],
            conv_filters: vec![8],
            kernel_size: vec![8],
            dense_layers: vec![1],
            dense_size: vec![128],
            dropout_rate: vec![0.0],
            maxpool_size: vec![0],
            activation: vec![Activation::Tanh],
        };
        assert_eq!(expand_grid(&g).unwrap().len(), 1);
    }

    #[test]
    fn empty_domain_is_error() {
        let mut g = GridDomains::full();
        g.kernel_size.clear();
        assert!(matches!(expand_grid(&g), Err(Error::Grid(_))));
    }

    #[test]
    fn parses_toml() {
        let text = r#"
conv_layers = [1]
conv_filters = [8, 32]
kernel_size = [8]
dense_layers = [1]
dense_size = [128]
dropout_rate = [0.0]
maxpool_size = [0, 4]
activation = ["leaky_relu", "tanh"]
"#;
        assert_eq!(
            GridDomains::from_toml_str(text).unwrap(),
            GridDomains::reduced()
        );
    }
}
