//! Marginal maximum likelihood calibration by EM over a fixed quadrature grid.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, ArrayView1, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{logistic, ItemParameterSet, ItemParams};
use super::quadrature::{Quadrature, DEFAULT_NODES, DEFAULT_RANGE};
use super::response::ResponseMatrix;
use crate::error::{Error, Result};

const PROB_FLOOR: f64 = 1e-12;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPrior {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaPrior {
    fn log_density(&self, c: f64) -> f64 {
        let mut v = 0.0;
        if self.alpha != 1.0 {
            v += (self.alpha - 1.0) * c.ln();
        }
        if self.beta != 1.0 {
            v += (self.beta - 1.0) * (1.0 - c).ln();
        }
        v
    }

    fn mode(&self) -> f64 {
        if self.alpha + self.beta > 2.0 {
            (self.alpha - 1.0) / (self.alpha + self.beta - 2.0)
        } else {
            0.5
        }
    }
}

/// Lognormal prior on discrimination: ln a ~ N(mu, sigma^2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalPrior {
    pub mu: f64,
    pub sigma: f64,
}

impl LogNormalPrior {
    fn log_density(&self, a: f64) -> f64 {
        let z = (a.ln() - self.mu) / self.sigma;
        -a.ln() - 0.5 * z * z
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub quadrature_nodes: usize,
    pub theta_min: f64,
    pub theta_max: f64,
    pub max_iter: usize,
    pub tolerance: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub b_min: f64,
    pub b_max: f64,
    pub c_max: f64,
    pub c_prior: Option<BetaPrior>,
    pub a_prior: Option<LogNormalPrior>,
    /// Newton steps per item inside one M-step.
    pub newton_steps: usize,
    pub waive_singularity_guard: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            quadrature_nodes: DEFAULT_NODES,
            theta_min: DEFAULT_RANGE.0,
            theta_max: DEFAULT_RANGE.1,
            max_iter: 500,
            tolerance: 1e-4,
            a_min: 0.01,
            a_max: 10.0,
            b_min: -6.0,
            b_max: 6.0,
            c_max: 0.35,
            c_prior: Some(BetaPrior {
                alpha: 2.0,
                beta: 10.0,
            }),
            a_prior: Some(LogNormalPrior {
                mu: 0.0,
                sigma: 0.5,
            }),
            newton_steps: 5,
            waive_singularity_guard: false,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Domain(m));
        if self.max_iter == 0 || self.newton_steps == 0 {
            return bad("max_iter and newton_steps must be positive".into());
        }
        if !(self.tolerance > 0.0) {
            return bad(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            ));
        }
        if !(self.a_min > 0.0 && self.a_min < self.a_max && self.a_max.is_finite()) {
            return bad(format!(
                "discrimination bounds must satisfy 0 < a_min < a_max, got [{}, {}]",
                self.a_min, self.a_max
            ));
        }
        if !(self.b_min < self.b_max && self.b_min.is_finite() && self.b_max.is_finite()) {
            return bad(format!(
                "difficulty bounds must be finite with b_min < b_max, got [{}, {}]",
                self.b_min, self.b_max
            ));
        }
        if !(0.0..1.0).contains(&self.c_max) {
            return bad(format!("c_max must lie in [0, 1), got {}", self.c_max));
        }
        if let Some(p) = self.c_prior {
            if !(p.alpha >= 1.0 && p.beta >= 1.0) {
                return bad(format!(
                    "guessing prior needs alpha, beta >= 1, got ({}, {})",
                    p.alpha, p.beta
                ));
            }
            if self.c_max == 0.0 && p.alpha > 1.0 {
                return bad("guessing prior with alpha > 1 needs c_max > 0".into());
            }
        }
        if let Some(p) = self.a_prior {
            if !(p.sigma > 0.0 && p.sigma.is_finite() && p.mu.is_finite()) {
                return bad(format!(
                    "discrimination prior needs finite mu and sigma > 0, got ({}, {})",
                    p.mu, p.sigma
                ));
            }
        }
        Ok(())
    }

    pub fn quadrature(&self) -> Result<Quadrature> {
        Quadrature::new(self.quadrature_nodes, self.theta_min, self.theta_max)
    }

    fn lower(&self) -> [f64; 3] {
        [self.a_min, self.b_min, 0.0]
    }

    fn upper(&self) -> [f64; 3] {
        [self.a_max, self.b_max, self.c_max]
    }

    fn log_prior(&self, p: &ItemParams) -> f64 {
        self.c_prior.map_or(0.0, |pr| pr.log_density(p.c))
            + self.a_prior.map_or(0.0, |pr| pr.log_density(p.a))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbilityEstimates {
    pub theta: Vec<f64>,
    pub sd: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub items: ItemParameterSet,
    pub abilities: AbilityEstimates,
    pub true_scores: Vec<f64>,
    /// Observed-data log-likelihood at the start of each iteration and after
    /// the last one.
    pub loglik_history: Vec<f64>,
    /// Log-likelihood plus the log priors, the quantity EM ascends.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl FitResult {
    pub fn final_loglik(&self) -> f64 {
        *self.loglik_history.last().expect("history is never empty")
    }
}

#[inline]
fn clamped_prob(x: f64, p: &ItemParams) -> f64 {
    p.prob(x).clamp(PROB_FLOOR, 1.0 - PROB_FLOOR)
}

struct EStep {
    loglik: f64,
    posterior: Array2<f64>,
}

fn e_step(u: &Array2<f64>, params: &[ItemParams], quad: &Quadrature) -> EStep {
    let n_items = params.len();
    let nq = quad.len();
    let mut diff = Array2::<f64>::zeros((n_items, nq));
    let mut base = Array1::<f64>::from(quad.log_weights.clone());
    for (j, p) in params.iter().enumerate() {
        for (q, &x) in quad.nodes.iter().enumerate() {
            let pr = clamped_prob(x, p);
            let (lp, lq) = (pr.ln(), (1.0 - pr).ln());
            diff[[j, q]] = lp - lq;
            base[q] += lq;
        }
    }
    let mut logpost = u.dot(&diff);
    logpost += &base;
    let mut loglik = 0.0;
    for mut row in logpost.axis_iter_mut(Axis(0)) {
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = row.iter().map(|v| (v - m).exp()).sum();
        let lse = m + s.ln();
        loglik += lse;
        row.mapv_inplace(|v| (v - lse).exp());
    }
    EStep {
        loglik,
        posterior: logpost,
    }
}

fn item_objective(
    p: &ItemParams,
    r: ArrayView1<f64>,
    n: &[f64],
    nodes: &[f64],
    cfg: &FitConfig,
) -> f64 {
    let mut q = cfg.log_prior(p);
    for ((&x, &rq), &nq) in nodes.iter().zip(r.iter()).zip(n) {
        let pr = clamped_prob(x, p);
        q += rq * pr.ln() + (nq - rq) * (1.0 - pr).ln();
    }
    q
}

fn gradient_and_information(
    p: &ItemParams,
    r: ArrayView1<f64>,
    n: &[f64],
    nodes: &[f64],
    cfg: &FitConfig,
) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut g = [0.0; 3];
    let mut info = [[0.0; 3]; 3];
    for ((&x, &rq), &nq) in nodes.iter().zip(r.iter()).zip(n) {
        let l = logistic(p.a * (x - p.b));
        let pr = clamped_prob(x, p);
        let w = l * (1.0 - l);
        let dp = [(1.0 - p.c) * w * (x - p.b), -(1.0 - p.c) * w * p.a, 1.0 - l];
        let v = pr * (1.0 - pr);
        let s = (rq - nq * pr) / v;
        for i in 0..3 {
            g[i] += s * dp[i];
            for k in 0..3 {
                info[i][k] += nq * dp[i] * dp[k] / v;
            }
        }
    }
    if let Some(prior) = cfg.c_prior {
        let c = p.c.max(PROB_FLOOR);
        g[2] += (prior.alpha - 1.0) / c - (prior.beta - 1.0) / (1.0 - c);
        info[2][2] += (prior.alpha - 1.0) / (c * c) + (prior.beta - 1.0) / ((1.0 - c) * (1.0 - c));
    }
    if let Some(prior) = cfg.a_prior {
        let s2 = prior.sigma * prior.sigma;
        g[0] += -1.0 / p.a - (p.a.ln() - prior.mu) / (s2 * p.a);
        info[0][0] += 1.0 / (s2 * p.a * p.a);
    }
    (g, info)
}

fn to_array(p: &ItemParams) -> [f64; 3] {
    [p.a, p.b, p.c]
}

fn from_array(v: [f64; 3]) -> ItemParams {
    ItemParams {
        a: v[0],
        b: v[1],
        c: v[2],
    }
}

/// Projected Fisher scoring on one item. Every accepted step keeps the
/// item's expected complete-data objective from decreasing.
fn m_step_item(
    start: ItemParams,
    r: ArrayView1<f64>,
    n: &[f64],
    nodes: &[f64],
    cfg: &FitConfig,
) -> ItemParams {
    let lo = cfg.lower();
    let hi = cfg.upper();
    let mut cur = start;
    let mut cur_q = item_objective(&cur, r, n, nodes, cfg);
    for _ in 0..cfg.newton_steps {
        let (g, info) = gradient_and_information(&cur, r, n, nodes, cfg);
        let x = to_array(&cur);
        let free: Vec<usize> = (0..3)
            .filter(|&i| !((x[i] <= lo[i] && g[i] <= 0.0) || (x[i] >= hi[i] && g[i] >= 0.0)))
            .filter(|&i| hi[i] > lo[i])
            .collect();
        if free.is_empty() {
            break;
        }
        let k = free.len();
        let mut m = DMatrix::<f64>::zeros(k, k);
        let mut rhs = DVector::<f64>::zeros(k);
        let mut trace = 0.0;
        for (ii, &i) in free.iter().enumerate() {
            rhs[ii] = g[i];
            trace += info[i][i];
            for (kk, &j) in free.iter().enumerate() {
                m[(ii, kk)] = info[i][j];
            }
        }
        let ridge = 1e-10 * (trace / k as f64).max(1e-12);
        for ii in 0..k {
            m[(ii, ii)] += ridge;
        }
        let delta = match m.cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => rhs.clone(),
        };
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let mut y = x;
            for (ii, &i) in free.iter().enumerate() {
                y[i] = (x[i] + step * delta[ii]).clamp(lo[i], hi[i]);
            }
            let cand = from_array(y);
            let q = item_objective(&cand, r, n, nodes, cfg);
            if q.is_finite() && q >= cur_q {
                let moved = (0..3).map(|i| (y[i] - x[i]).abs()).fold(0.0, f64::max);
                cur = cand;
                cur_q = q;
                accepted = moved > 0.0;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    cur
}

fn initial_params(rm: &ResponseMatrix, cfg: &FitConfig) -> Vec<ItemParams> {
    let c0 = cfg
        .c_prior
        .map_or(0.1, |p| p.mode())
        .min(cfg.c_max / 2.0)
        .max(if cfg.c_prior.is_some_and(|p| p.alpha > 1.0) {
            cfg.c_max / 10.0
        } else {
            0.0
        });
    let a0 = 1.0f64.clamp(cfg.a_min, cfg.a_max);
    let n = rm.n_respondents() as f64;
    rm.correct()
        .axis_iter(Axis(1))
        .map(|col| {
            let pbar = col.iter().map(|&v| v as f64).sum::<f64>() / n;
            let adj = ((pbar - c0) / (1.0 - c0)).clamp(0.02, 0.98);
            let b0 = (-(adj / (1.0 - adj)).ln()).clamp(cfg.b_min, cfg.b_max);
            ItemParams {
                a: a0,
                b: b0,
                c: c0,
            }
        })
        .collect()
}

/// Posterior mean and standard deviation of ability for one response row.
pub fn eap_ability(row: ArrayView1<u8>, items: &[ItemParams], quad: &Quadrature) -> (f64, f64) {
    let logpost: Vec<f64> = quad
        .nodes
        .iter()
        .zip(&quad.log_weights)
        .map(|(&x, &lw)| {
            lw + row
                .iter()
                .zip(items)
                .map(|(&u, p)| {
                    let pr = clamped_prob(x, p);
                    if u == 1 {
                        pr.ln()
                    } else {
                        (1.0 - pr).ln()
                    }
                })
                .sum::<f64>()
        })
        .collect();
    let m = logpost.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logpost.iter().map(|v| (v - m).exp()).collect();
    posterior_moments(&w, &quad.nodes)
}

fn posterior_moments(w: &[f64], nodes: &[f64]) -> (f64, f64) {
    let total: f64 = w.iter().sum();
    let mean = w.iter().zip(nodes).map(|(w, x)| w * x).sum::<f64>() / total;
    let var = w
        .iter()
        .zip(nodes)
        .map(|(w, x)| w * (x - mean) * (x - mean))
        .sum::<f64>()
        / total;
    (mean, var.max(0.0).sqrt())
}

/// Calibrates 3PL item parameters and estimates respondent abilities.
pub fn fit_3pl(rm: &ResponseMatrix, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    if !cfg.waive_singularity_guard {
        if let Some(j) = rm.constant_item() {
            return Err(Error::Singular {
                item: rm.item_ids()[j].clone(),
            });
        }
    }
    let quad = cfg.quadrature()?;
    let u = rm.correct().mapv(|v| v as f64);
    let ut = u.t().to_owned();
    let mut params = initial_params(rm, cfg);
    let mut loglik_history = Vec::new();
    let mut objective_history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let log_prior = |ps: &[ItemParams]| ps.iter().map(|p| cfg.log_prior(p)).sum::<f64>();

    let mut e = e_step(&u, &params, &quad);
    loop {
        loglik_history.push(e.loglik);
        objective_history.push(e.loglik + log_prior(&params));
        if converged || iterations == cfg.max_iter {
            break;
        }
        let n_q: Vec<f64> = e.posterior.sum_axis(Axis(0)).to_vec();
        let r = ut.dot(&e.posterior);
        let next: Vec<ItemParams> = params
            .par_iter()
            .enumerate()
            .map(|(j, p)| m_step_item(*p, r.row(j), &n_q, &quad.nodes, cfg))
            .collect();
        let change = params
            .iter()
            .zip(&next)
            .flat_map(|(p, q)| [(p.a - q.a).abs(), (p.b - q.b).abs(), (p.c - q.c).abs()])
            .fold(0.0, f64::max);
        params = next;
        iterations += 1;
        converged = change < cfg.tolerance;
        e = e_step(&u, &params, &quad);
    }

    let (theta, sd): (Vec<f64>, Vec<f64>) = e
        .posterior
        .axis_iter(Axis(0))
        .map(|w| posterior_moments(w.as_slice().expect("row is contiguous"), &quad.nodes))
        .unzip();
    let true_scores = theta
        .iter()
        .map(|&t| super::model::true_score(t, &params))
        .collect();
    Ok(FitResult {
        items: ItemParameterSet::new(rm.item_ids().to_vec(), params),
        abilities: AbilityEstimates { theta, sd },
        true_scores,
        loglik_history,
        objective_history,
        iterations,
        converged,
    })
}
