use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RespondentKind {
    Trained,
    Random,
    Optimistic,
    Pessimistic,
}

impl RespondentKind {
    pub fn is_artificial(self) -> bool {
        self != RespondentKind::Trained
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RespondentKind::Trained => "trained",
            RespondentKind::Random => "random",
            RespondentKind::Optimistic => "optimistic",
            RespondentKind::Pessimistic => "pessimistic",
        }
    }
}

impl fmt::Display for RespondentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RespondentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trained" => Ok(RespondentKind::Trained),
            "random" => Ok(RespondentKind::Random),
            "optimistic" => Ok(RespondentKind::Optimistic),
            "pessimistic" => Ok(RespondentKind::Pessimistic),
            other => Err(Error::ResponseMatrix(format!(
                "unknown respondent kind {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Respondent {
    pub id: String,
    pub kind: RespondentKind,
}

impl Respondent {
    pub fn new(id: impl Into<String>, kind: RespondentKind) -> Self {
        Respondent {
            id: id.into(),
            kind,
        }
    }
}

/// Binary correctness table: respondents (models) by items (test instances).
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMatrix {
    respondents: Vec<Respondent>,
    item_ids: Vec<String>,
    correct: Array2<u8>,
}

impl ResponseMatrix {
    pub fn new(
        respondents: Vec<Respondent>,
        item_ids: Vec<String>,
        correct: Array2<u8>,
    ) -> Result<Self> {
        let (r, i) = correct.dim();
        if r != respondents.len() || i != item_ids.len() {
            return Err(Error::ResponseMatrix(format!(
                "matrix is {r}x{i} but there are {} respondents and {} items",
                respondents.len(),
                item_ids.len()
            )));
        }
        if r < 2 || i < 2 {
            return Err(Error::ResponseMatrix(format!(
                "need at least 2 respondents and 2 items, got {r}x{i}"
            )));
        }
        if let Some(v) = correct.iter().find(|&&v| v > 1) {
            return Err(Error::ResponseMatrix(format!("entry {v} is not 0 or 1")));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = respondents.iter().find(|r| !seen.insert(r.id.as_str())) {
            return Err(Error::ResponseMatrix(format!(
                "duplicate respondent id {}",
                dup.id
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = item_ids.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(Error::ResponseMatrix(format!("duplicate item id {dup}")));
        }
        Ok(ResponseMatrix {
            respondents,
            item_ids,
            correct,
        })
    }

    pub fn respondents(&self) -> &[Respondent] {
        &self.respondents
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn correct(&self) -> &Array2<u8> {
        &self.correct
    }

    pub fn n_respondents(&self) -> usize {
        self.respondents.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_ids.len()
    }

    pub fn row(&self, r: usize) -> ArrayView1<'_, u8> {
        self.correct.row(r)
    }

    /// Fraction of items answered correctly by each respondent.
    pub fn row_accuracy(&self) -> Vec<f64> {
        let n = self.n_items() as f64;
        self.correct
            .axis_iter(Axis(0))
            .map(|row| row.iter().map(|&v| v as f64).sum::<f64>() / n)
            .collect()
    }

    /// First item whose column holds a single value.
    pub fn constant_item(&self) -> Option<usize> {
        self.correct.axis_iter(Axis(1)).position(|col| {
            let first = col[0];
            col.iter().all(|&v| v == first)
        })
    }

    pub fn has_artificials(&self) -> bool {
        self.respondents.iter().any(|r| r.kind.is_artificial())
    }

    /// Appends rows, keeping the item set.
    pub fn with_rows(&self, extra: Vec<Respondent>, rows: Array2<u8>) -> Result<Self> {
        let mut respondents = self.respondents.clone();
        respondents.extend(extra);
        let correct = ndarray::concatenate(Axis(0), &[self.correct.view(), rows.view()])
            .map_err(|e| Error::ResponseMatrix(e.to_string()))?;
        ResponseMatrix::new(respondents, self.item_ids.clone(), correct)
    }
}
