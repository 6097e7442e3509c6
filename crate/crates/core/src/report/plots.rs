use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{io_err, num, version_line};
use crate::error::{Error, Result};
use crate::irt::{FitResult, RespondentKind, ResponseMatrix};
use crate::pipeline::{RoutingKind, RunReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    DifficultyVsDiscrimination,
    AbilityVsAccuracy,
    BinHistogram,
}

impl PlotKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PlotKind::DifficultyVsDiscrimination => "difficulty_vs_discrimination",
            PlotKind::AbilityVsAccuracy => "ability_vs_accuracy",
            PlotKind::BinHistogram => "bin_histogram",
        }
    }

    pub fn header(self) -> &'static [&'static str] {
        match self {
            PlotKind::DifficultyVsDiscrimination => &["item", "b_norm", "a_norm"],
            PlotKind::AbilityVsAccuracy => &["respondent", "kind", "theta", "accuracy"],
            PlotKind::BinHistogram => &["routing", "bin", "model", "lo", "hi", "accuracy", "size"],
        }
    }
}

impl fmt::Display for PlotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemPoint {
    pub item: String,
    pub b_norm: f64,
    pub a_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbilityPoint {
    pub respondent: String,
    pub kind: RespondentKind,
    pub theta: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinBar {
    pub routing: RoutingKind,
    /// One-based, easiest first.
    pub bin: usize,
    pub model: String,
    pub lo: f64,
    pub hi: f64,
    pub accuracy: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PlotSeries {
    DifficultyVsDiscrimination(Vec<ItemPoint>),
    AbilityVsAccuracy(Vec<AbilityPoint>),
    BinHistogram(Vec<BinBar>),
}

impl PlotSeries {
    pub fn kind(&self) -> PlotKind {
        match self {
            PlotSeries::DifficultyVsDiscrimination(_) => PlotKind::DifficultyVsDiscrimination,
            PlotSeries::AbilityVsAccuracy(_) => PlotKind::AbilityVsAccuracy,
            PlotSeries::BinHistogram(_) => PlotKind::BinHistogram,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            PlotSeries::DifficultyVsDiscrimination(v) => v.len(),
            PlotSeries::AbilityVsAccuracy(v) => v.len(),
            PlotSeries::BinHistogram(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.kind().header())?;
        match self {
            PlotSeries::DifficultyVsDiscrimination(v) => {
                for p in v {
                    w.write_record([p.item.clone(), num(p.b_norm), num(p.a_norm)])?;
                }
            }
            PlotSeries::AbilityVsAccuracy(v) => {
                for p in v {
                    w.write_record([
                        p.respondent.clone(),
                        p.kind.to_string(),
                        num(p.theta),
                        num(p.accuracy),
                    ])?;
                }
            }
            PlotSeries::BinHistogram(v) => {
                for b in v {
                    w.write_record([
                        b.routing.to_string(),
                        b.bin.to_string(),
                        b.model.clone(),
                        num(b.lo),
                        num(b.hi),
                        num(b.accuracy),
                        b.size.to_string(),
                    ])?;
                }
            }
        }
        let body = w.into_inner().map_err(|e| Error::Serde(e.to_string()))?;
        out.write_all(version_line().as_bytes()).map_err(io_err)?;
        out.write_all(&body).map_err(io_err)
    }
}

/// Normalized difficulty against normalized discrimination, one point per
/// item.
pub fn emit_item_scatter(fit: &FitResult) -> PlotSeries {
    let it = &fit.items;
    PlotSeries::DifficultyVsDiscrimination(
        (0..it.len())
            .map(|j| ItemPoint {
                item: it.item_ids[j].clone(),
                b_norm: it.b_norm[j],
                a_norm: it.a_norm[j],
            })
            .collect(),
    )
}

/// Ability against raw accuracy, one point per respondent, tagged by kind.
pub fn emit_ability_accuracy(rm: &ResponseMatrix, fit: &FitResult) -> PlotSeries {
    let acc = rm.row_accuracy();
    PlotSeries::AbilityVsAccuracy(
        rm.respondents()
            .iter()
            .enumerate()
            .map(|(r, resp)| AbilityPoint {
                respondent: resp.id.clone(),
                kind: resp.kind,
                theta: fit.abilities.theta[r],
                accuracy: acc[r],
            })
            .collect(),
    )
}

/// One bar per bin and routing kind.
pub fn emit_bin_histogram(report: &RunReport) -> PlotSeries {
    PlotSeries::BinHistogram(
        report
            .routes
            .iter()
            .flat_map(|routed| {
                routed.bins.iter().enumerate().map(move |(k, b)| BinBar {
                    routing: routed.kind,
                    bin: k + 1,
                    model: b.model_id.clone(),
                    lo: b.lo,
                    hi: b.hi,
                    accuracy: b.accuracy,
                    size: b.size,
                })
            })
            .collect(),
    )
}
