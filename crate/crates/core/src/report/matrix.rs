use std::io::Write;
use std::path::Path;

use indexmap::IndexMap;
use ndarray::Array2;

use super::{check_version, csv_reader, io_err, num, read_text, version_line, write_file};
use crate::error::{Error, Result};
use crate::irt::{Respondent, RespondentKind, ResponseMatrix};
use crate::zoo::PredictionVector;

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

pub fn write_response_matrix_to<W: Write>(rm: &ResponseMatrix, out: &mut W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    let mut header = vec!["respondent".to_string(), "kind".to_string()];
    header.extend(rm.item_ids().iter().cloned());
    w.write_record(&header)?;
    for (r, resp) in rm.respondents().iter().enumerate() {
        let mut rec = vec![resp.id.clone(), resp.kind.to_string()];
        rec.extend(rm.row(r).iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    let body = w.into_inner().map_err(|e| Error::Serde(e.to_string()))?;
    out.write_all(version_line().as_bytes()).map_err(io_err)?;
    out.write_all(&body).map_err(io_err)
}

pub fn write_response_matrix(rm: &ResponseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    write_response_matrix_to(rm, &mut buf)?;
    write_file(path.as_ref(), &buf)
}

pub fn read_response_matrix_from(text: &str) -> Result<ResponseMatrix> {
    check_version(text)?;
    let mut rdr = csv_reader(text);
    let header = rdr.headers()?.clone();
    if header.len() < 2 || &header[0] != "respondent" || &header[1] != "kind" {
        return Err(Error::Parse {
            line: line_of(&header),
            message: "header must start with `respondent,kind`".into(),
        });
    }
    let items: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    let mut respondents = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        let kind: RespondentKind = rec[1].parse().map_err(|e: Error| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        respondents.push(Respondent::new(&rec[0], kind));
        for (j, field) in rec.iter().skip(2).enumerate() {
            match field {
                "0" => values.push(0u8),
                "1" => values.push(1u8),
                other => {
                    return Err(Error::Parse {
                        line,
                        message: format!("item {} has value {other:?}, expected 0 or 1", items[j]),
                    })
                }
            }
        }
    }
    let correct = Array2::from_shape_vec((respondents.len(), items.len()), values)
        .map_err(|e| Error::ResponseMatrix(e.to_string()))?;
    ResponseMatrix::new(respondents, items, correct)
}

pub fn read_response_matrix(path: impl AsRef<Path>) -> Result<ResponseMatrix> {
    read_response_matrix_from(&read_text(path.as_ref())?)
}

/// Prediction vectors that share one instance order.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub instance_ids: Vec<String>,
    pub vectors: Vec<PredictionVector>,
}

pub fn write_predictions_to<W: Write>(
    instance_ids: &[String],
    vectors: &[PredictionVector],
    out: &mut W,
) -> Result<()> {
    let k = vectors.first().map_or(0, |v| v.probabilities.ncols());
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    let mut header = vec![
        "respondent".to_string(),
        "instance".into(),
        "predicted".into(),
    ];
    header.extend((0..k).map(|c| format!("p{c}")));
    w.write_record(&header)?;
    for v in vectors {
        if v.len() != instance_ids.len() || v.probabilities.ncols() != k {
            return Err(Error::Pipeline(format!(
                "prediction vector {} does not match the instance list",
                v.model_id
            )));
        }
        for (i, id) in instance_ids.iter().enumerate() {
            let mut rec = vec![v.model_id.clone(), id.clone(), v.predicted[i].to_string()];
            rec.extend(v.probabilities.row(i).iter().map(|&p| num(p)));
            w.write_record(&rec)?;
        }
    }
    let body = w.into_inner().map_err(|e| Error::Serde(e.to_string()))?;
    out.write_all(version_line().as_bytes()).map_err(io_err)?;
    out.write_all(&body).map_err(io_err)
}

pub fn write_predictions(
    instance_ids: &[String],
    vectors: &[PredictionVector],
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut buf = Vec::new();
    write_predictions_to(instance_ids, vectors, &mut buf)?;
    write_file(path.as_ref(), &buf)
}

/// Reads long-format predictions. Respondents keep their first-appearance
/// order and every respondent must cover the instances of the first one.
/// Without probability columns the probabilities are one-hot.
pub fn read_predictions_from(text: &str) -> Result<PredictionSet> {
    check_version(text)?;
    let mut rdr = csv_reader(text);
    let header = rdr.headers()?.clone();
    if header.len() < 3
        || &header[0] != "respondent"
        || &header[1] != "instance"
        || &header[2] != "predicted"
    {
        return Err(Error::Parse {
            line: line_of(&header),
            message: "header must start with `respondent,instance,predicted`".into(),
        });
    }
    let k_cols = header.len() - 3;
    let mut instance_ids: IndexMap<String, ()> = IndexMap::new();
    let mut rows: IndexMap<String, IndexMap<String, (usize, Vec<f64>)>> = IndexMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        let parse_err = |m: String| Error::Parse { line, message: m };
        let class: usize = rec[2]
            .parse()
            .map_err(|_| parse_err(format!("predicted class {:?} is not an index", &rec[2])))?;
        let probs = rec
            .iter()
            .skip(3)
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|p| p.is_finite() && *p >= 0.0)
                    .ok_or_else(|| {
                        parse_err(format!("probability {f:?} is not a nonnegative number"))
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        if k_cols > 0 && class >= k_cols {
            return Err(parse_err(format!(
                "class {class} exceeds the {k_cols} probability columns"
            )));
        }
        let first = rows.is_empty() || rows.len() == 1 && rows.contains_key(&rec[0]);
        if first {
            instance_ids.insert(rec[1].to_string(), ());
        }
        let per = rows.entry(rec[0].to_string()).or_default();
        if per.insert(rec[1].to_string(), (class, probs)).is_some() {
            return Err(parse_err(format!(
                "respondent {} predicts instance {} twice",
                &rec[0], &rec[1]
            )));
        }
    }
    let ids: Vec<String> = instance_ids.into_keys().collect();
    let k = if k_cols > 0 {
        k_cols
    } else {
        rows.values()
            .flat_map(|r| r.values().map(|(c, _)| c + 1))
            .max()
            .unwrap_or(1)
    };
    let mut vectors = Vec::with_capacity(rows.len());
    for (model, per) in rows {
        let mut predicted = Vec::with_capacity(ids.len());
        let mut probabilities = Array2::zeros((ids.len(), k));
        for (i, id) in ids.iter().enumerate() {
            let (class, probs) = per.get(id).ok_or_else(|| Error::MissingPrediction {
                model: model.clone(),
                instance: id.clone(),
            })?;
            predicted.push(*class);
            if probs.is_empty() {
                probabilities[[i, *class]] = 1.0;
            } else {
                probabilities
                    .row_mut(i)
                    .assign(&ndarray::ArrayView1::from(probs.as_slice()));
            }
        }
        if per.len() != ids.len() {
            let extra = per
                .keys()
                .find(|id| !ids.contains(id))
                .cloned()
                .unwrap_or_default();
            return Err(Error::Pipeline(format!(
                "respondent {model} predicts instance {extra}, which the first respondent does not"
            )));
        }
        vectors.push(PredictionVector {
            model_id: model,
            predicted,
            probabilities,
        });
    }
    Ok(PredictionSet {
        instance_ids: ids,
        vectors,
    })
}

pub fn read_predictions(path: impl AsRef<Path>) -> Result<PredictionSet> {
    read_predictions_from(&read_text(path.as_ref())?)
}
