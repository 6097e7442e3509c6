use crate::error::{Error, Result};

pub const DEFAULT_NODES: usize = 61;
pub const DEFAULT_RANGE: (f64, f64) = (-6.0, 6.0);

/// Equispaced nodes with normalized standard-normal weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub log_weights: Vec<f64>,
}

impl Quadrature {
    pub fn new(n: usize, lo: f64, hi: f64) -> Result<Self> {
        if n < 2 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Domain(format!(
                "quadrature needs at least 2 nodes on a finite interval, got {n} on [{lo}, {hi}]"
            )));
        }
        let step = (hi - lo) / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
        let dens: Vec<f64> = nodes.iter().map(|x| (-0.5 * x * x).exp()).collect();
        let total: f64 = dens.iter().sum();
        let weights: Vec<f64> = dens.iter().map(|d| d / total).collect();
        let log_weights = weights.iter().map(|w| w.ln()).collect();
        Ok(Quadrature {
            nodes,
            weights,
            log_weights,
        })
    }

    pub fn standard() -> Self {
        Quadrature::new(DEFAULT_NODES, DEFAULT_RANGE.0, DEFAULT_RANGE.1)
            .expect("default quadrature is valid")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_grid_is_symmetric_and_normalized() {
        let q = Quadrature::standard();
        assert_eq!(q.len(), 61);
        assert_eq!(q.nodes[0], -6.0);
        assert!((q.nodes[60] - 6.0).abs() < 1e-12);
        assert!((q.nodes[30]).abs() < 1e-12);
        assert!((q.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for i in 0..30 {
            assert!((q.weights[i] - q.weights[60 - i]).abs() < 1e-15);
        }
        let var: f64 = q.nodes.iter().zip(&q.weights).map(|(x, w)| w * x * x).sum();
        assert!((var - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_grid() {
        assert!(Quadrature::new(1, -1.0, 1.0).is_err());
        assert!(Quadrature::new(5, 1.0, 1.0).is_err());
    }
}
