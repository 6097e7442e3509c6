use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::matrix::{write_predictions_to, write_response_matrix_to};
use super::params::write_fit;
use super::plots::{emit_ability_accuracy, emit_bin_histogram, emit_item_scatter};
use super::{io_err, num, round12, version_line, write_file, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::pipeline::{
    fold_label, ComplexitySummary, RunArtifacts, RunConfig, RunReport, SummaryRow,
};

/// Accuracy table columns, left to right.
pub const SUMMARY_HEADER: [&str; 6] = [
    "fold",
    "irt_difficulty",
    "irt_discrimination",
    "voting_irt_rank",
    "single_cnn",
    "voting_all",
];

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn finish<W: Write>(w: csv::Writer<Vec<u8>>, out: &mut W) -> Result<()> {
    let body = w.into_inner().map_err(|e| Error::Serde(e.to_string()))?;
    out.write_all(version_line().as_bytes()).map_err(io_err)?;
    out.write_all(&body).map_err(io_err)
}

pub fn write_summary_to<W: Write>(rows: &[SummaryRow], out: &mut W) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            r.label.clone(),
            opt(r.difficulty),
            opt(r.discrimination),
            opt(r.vote_rank),
            opt(r.single_cnn),
            opt(r.vote_all),
        ])?;
    }
    finish(w, out)
}

/// Parameter totals: the rank, the single CNN and the whole zoo.
pub fn write_complexity_to<W: Write>(
    dataset: &str,
    c: &ComplexitySummary,
    out: &mut W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "dataset",
        "zoo_size",
        "rank_size",
        "irt_rank",
        "single_cnn",
        "voting_all",
    ])?;
    w.write_record([
        dataset.to_string(),
        c.zoo_size.to_string(),
        c.rank_size.to_string(),
        c.rank_total.to_string(),
        c.single.to_string(),
        c.vote_all.to_string(),
    ])?;
    finish(w, out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub format_version: u32,
    pub dataset: String,
    pub config: RunConfig,
    pub runs: Vec<RunReport>,
    pub summary: Vec<SummaryRow>,
    pub complexity: Option<ComplexitySummary>,
}

impl ReportFile {
    pub fn new(
        dataset: impl Into<String>,
        config: RunConfig,
        runs: Vec<RunReport>,
        summary: Vec<SummaryRow>,
        complexity: Option<ComplexitySummary>,
    ) -> Self {
        ReportFile {
            format_version: FORMAT_VERSION,
            dataset: dataset.into(),
            config,
            runs,
            summary,
            complexity,
        }
    }
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n
                .as_f64()
                .map(round12)
                .and_then(serde_json::Number::from_f64)
            {
                *n = x;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_floats),
        Value::Object(o) => o.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to twelve significant digits.
pub fn report_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_floats(&mut v);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct VersionedRun<'a> {
    format_version: u32,
    #[serde(flatten)]
    report: &'a RunReport,
}

pub fn run_dir_name(report: &RunReport) -> String {
    format!(
        "{}_run{}",
        fold_label(report.fold_ratio).replace('/', "-"),
        report.run
    )
}

/// Writes every per-run file under `root/runs/<fold>_run<k>/` and returns
/// that directory.
pub fn write_run_dir(root: &Path, art: &RunArtifacts) -> Result<PathBuf> {
    let dir = root.join("runs").join(run_dir_name(&art.report));
    let json = report_json(&VersionedRun {
        format_version: FORMAT_VERSION,
        report: &art.report,
    })?;
    write_file(&dir.join("report.json"), json.as_bytes())?;

    let mut buf = Vec::new();
    write_response_matrix_to(&art.matrix, &mut buf)?;
    write_file(&dir.join("response_matrix.csv"), &buf)?;

    let m = art.report.zoo_size;
    let mut vectors = art.predictions[..m].to_vec();
    vectors.extend(art.single.iter().cloned());
    buf.clear();
    write_predictions_to(&art.instance_ids, &vectors, &mut buf)?;
    write_file(&dir.join("predictions.csv"), &buf)?;

    write_fit(&art.matrix, &art.fit, &dir)?;

    for series in [
        emit_item_scatter(&art.fit),
        emit_ability_accuracy(&art.matrix, &art.fit),
        emit_bin_histogram(&art.report),
    ] {
        buf.clear();
        series.write_csv(&mut buf)?;
        write_file(&dir.join(format!("plot_{}.csv", series.kind())), &buf)?;
    }

    if let Some(manifest) = &art.manifest {
        write_file(
            &dir.join("zoo_manifest.json"),
            report_json(manifest)?.as_bytes(),
        )?;
    }
    Ok(dir)
}
