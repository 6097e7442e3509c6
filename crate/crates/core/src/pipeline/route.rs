use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::irt::{FitResult, ItemParameterSet, ResponseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoutingKind {
    Difficulty,
    Discrimination,
}

impl RoutingKind {
    pub const ALL: [RoutingKind; 2] = [RoutingKind::Difficulty, RoutingKind::Discrimination];

    pub fn as_str(self) -> &'static str {
        match self {
            RoutingKind::Difficulty => "difficulty",
            RoutingKind::Discrimination => "discrimination",
        }
    }

    /// Normalized parameter values used to order instances.
    pub fn values(self, items: &ItemParameterSet) -> &[f64] {
        match self {
            RoutingKind::Difficulty => &items.b_norm,
            RoutingKind::Discrimination => &items.a_norm,
        }
    }
}

impl fmt::Display for RoutingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for RoutingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "difficulty" => Ok(RoutingKind::Difficulty),
            "discrimination" => Ok(RoutingKind::Discrimination),
            other => Err(Error::Pipeline(format!("unknown routing kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub model_id: String,
    /// Row of the model in the response matrix.
    pub respondent: usize,
    pub theta: f64,
    pub true_score: f64,
}

/// Selected models, weakest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRank {
    pub entries: Vec<RankEntry>,
}

impl ModelRank {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Picks the `n` trained respondents with the highest true scores and orders
/// them by ascending score. Equal scores favour the earlier row.
pub fn select_rank(rm: &ResponseMatrix, fit: &FitResult, n: usize) -> Result<ModelRank> {
    if n == 0 {
        return Err(Error::Pipeline("rank size must be at least 1".into()));
    }
    let mut trained: Vec<usize> = rm
        .respondents()
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.kind.is_artificial())
        .map(|(i, _)| i)
        .collect();
    if n > trained.len() {
        return Err(Error::Pipeline(format!(
            "rank size {n} exceeds the {} trained models",
            trained.len()
        )));
    }
    let score = |i: usize| fit.true_scores[i];
    trained.sort_by(|&x, &y| score(y).total_cmp(&score(x)).then(x.cmp(&y)));
    let mut chosen = trained[..n].to_vec();
    chosen.sort_by(|&x, &y| score(x).total_cmp(&score(y)).then(x.cmp(&y)));
    Ok(ModelRank {
        entries: chosen
            .into_iter()
            .map(|i| RankEntry {
                model_id: rm.respondents()[i].id.clone(),
                respondent: i,
                theta: fit.abilities.theta[i],
                true_score: fit.true_scores[i],
            })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    /// Test-set positions in ascending parameter order.
    pub instances: Vec<usize>,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinAssignment {
    pub kind: RoutingKind,
    pub bins: Vec<Bin>,
}

/// Near-equal chunk sizes; the first `total % n` chunks get one extra.
pub fn bin_sizes(total: usize, n: usize) -> Vec<usize> {
    let (base, extra) = (total / n, total % n);
    (0..n).map(|k| base + usize::from(k < extra)).collect()
}

/// Sorts instances by the normalized parameter (ties by position) and cuts
/// them into `n` contiguous bins.
pub fn separate_bins(
    items: &ItemParameterSet,
    kind: RoutingKind,
    n: usize,
) -> Result<BinAssignment> {
    let total = items.len();
    if n == 0 || n > total {
        return Err(Error::Pipeline(format!(
            "cannot cut {total} instances into {n} bins"
        )));
    }
    let values = kind.values(items);
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&x, &y| values[x].total_cmp(&values[y]).then(x.cmp(&y)));
    let mut bins = Vec::with_capacity(n);
    let mut start = 0;
    for size in bin_sizes(total, n) {
        let instances = order[start..start + size].to_vec();
        bins.push(Bin {
            lo: values[instances[0]],
            hi: values[instances[size - 1]],
            instances,
        });
        start += size;
    }
    Ok(BinAssignment { kind, bins })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinRecord {
    pub model_id: String,
    pub lo: f64,
    pub hi: f64,
    pub correct: usize,
    pub size: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Routed {
    pub kind: RoutingKind,
    pub bins: Vec<BinRecord>,
    /// Per-instance prediction of whichever model handled the instance.
    pub stitched: Vec<usize>,
    pub consolidated: f64,
}

/// Sends bin `k` to rank position `k`. `predicted` holds one class vector per
/// response-matrix row.
pub fn route_classify(
    rank: &ModelRank,
    bins: &BinAssignment,
    predicted: &[Vec<usize>],
    truth: &[usize],
) -> Result<Routed> {
    if rank.len() != bins.bins.len() {
        return Err(Error::Pipeline(format!(
            "{} ranked models for {} bins",
            rank.len(),
            bins.bins.len()
        )));
    }
    let mut stitched = vec![usize::MAX; truth.len()];
    let mut records = Vec::with_capacity(rank.len());
    for (entry, bin) in rank.entries.iter().zip(&bins.bins) {
        let preds = predicted.get(entry.respondent).ok_or_else(|| {
            Error::Pipeline(format!("no predictions for model {}", entry.model_id))
        })?;
        let mut correct = 0;
        for &i in &bin.instances {
            let p = *preds.get(i).ok_or_else(|| Error::MissingPrediction {
                model: entry.model_id.clone(),
                instance: i.to_string(),
            })?;
            if stitched[i] != usize::MAX {
                return Err(Error::Pipeline(format!("instance {i} falls in two bins")));
            }
            stitched[i] = p;
            correct += usize::from(p == truth[i]);
        }
        records.push(BinRecord {
            model_id: entry.model_id.clone(),
            lo: bin.lo,
            hi: bin.hi,
            correct,
            size: bin.instances.len(),
            accuracy: correct as f64 / bin.instances.len() as f64,
        });
    }
    if let Some(i) = stitched.iter().position(|&p| p == usize::MAX) {
        return Err(Error::Pipeline(format!("instance {i} is in no bin")));
    }
    Ok(Routed {
        kind: bins.kind,
        consolidated: consolidate(&records),
        bins: records,
        stitched,
    })
}

/// Total correct over total routed instances.
pub fn consolidate(records: &[BinRecord]) -> f64 {
    let correct: usize = records.iter().map(|r| r.correct).sum();
    let size: usize = records.iter().map(|r| r.size).sum();
    if size == 0 {
        0.0
    } else {
        correct as f64 / size as f64
    }
}
