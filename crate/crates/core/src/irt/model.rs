//! The three-parameter logistic item model and derived quantities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `c + (1 - c) * logistic(a * (theta - b))` without domain checks.
#[inline]
pub fn prob(theta: f64, a: f64, b: f64, c: f64) -> f64 {
    c + (1.0 - c) * logistic(a * (theta - b))
}

/// Probability of a correct response under the 3PL model.
pub fn p3pl(theta: f64, a: f64, b: f64, c: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!(
            "discrimination must be positive, got {a}"
        )));
    }
    if !((0.0..1.0).contains(&c)) {
        return Err(Error::Domain(format!(
            "guessing must lie in [0, 1), got {c}"
        )));
    }
    if !b.is_finite() || theta.is_nan() {
        return Err(Error::Domain(
            "difficulty and ability must be numbers".into(),
        ));
    }
    Ok(prob(theta, a, b, c))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ItemParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl ItemParams {
    pub fn prob(&self, theta: f64) -> f64 {
        prob(theta, self.a, self.b, self.c)
    }
}

/// Fitted item parameters with their min-max normalized discrimination and
/// difficulty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemParameterSet {
    pub item_ids: Vec<String>,
    pub params: Vec<ItemParams>,
    pub a_norm: Vec<f64>,
    pub b_norm: Vec<f64>,
    /// Set when every item shares one discrimination value.
    pub a_degenerate: bool,
    /// Set when every item shares one difficulty value.
    pub b_degenerate: bool,
}

impl ItemParameterSet {
    pub fn new(item_ids: Vec<String>, params: Vec<ItemParams>) -> Self {
        let mut set = ItemParameterSet {
            item_ids,
            params,
            a_norm: Vec::new(),
            b_norm: Vec::new(),
            a_degenerate: false,
            b_degenerate: false,
        };
        set.normalize();
        set
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn a(&self) -> Vec<f64> {
        self.params.iter().map(|p| p.a).collect()
    }

    pub fn b(&self) -> Vec<f64> {
        self.params.iter().map(|p| p.b).collect()
    }

    pub fn c(&self) -> Vec<f64> {
        self.params.iter().map(|p| p.c).collect()
    }

    /// Recomputes `a_norm` and `b_norm`.
    pub fn normalize(&mut self) {
        let (a_norm, a_deg) = min_max(&self.a());
        let (b_norm, b_deg) = min_max(&self.b());
        self.a_norm = a_norm;
        self.b_norm = b_norm;
        self.a_degenerate = a_deg;
        self.b_degenerate = b_deg;
    }
}

/// Rescales to [0, 1] with the minimum at 0 and the maximum at 1. When all
/// values are equal they map to 0.5 and the flag is raised.
pub fn min_max(values: &[f64]) -> (Vec<f64>, bool) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() || hi <= lo {
        return (vec![0.5; values.len()], true);
    }
    let span = hi - lo;
    (
        values
            .iter()
            .map(|&v| ((v - lo) / span).clamp(0.0, 1.0))
            .collect(),
        false,
    )
}

/// Expected number of correct responses at ability `theta`.
pub fn true_score(theta: f64, items: &[ItemParams]) -> f64 {
    items.iter().map(|p| p.prob(theta)).sum()
}
