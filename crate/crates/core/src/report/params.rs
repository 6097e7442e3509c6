use std::io::Write;
use std::path::Path;

use super::{io_err, num, version_line, write_file};
use crate::error::{Error, Result};
use crate::irt::{FitResult, ResponseMatrix};

fn finish<W: Write>(w: csv::Writer<Vec<u8>>, out: &mut W) -> Result<()> {
    let body = w.into_inner().map_err(|e| Error::Serde(e.to_string()))?;
    out.write_all(version_line().as_bytes()).map_err(io_err)?;
    out.write_all(&body).map_err(io_err)
}

/// One row per item: id, a, b, c, a_norm, b_norm.
pub fn write_items_to<W: Write>(fit: &FitResult, out: &mut W) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["item", "a", "b", "c", "a_norm", "b_norm"])?;
    let it = &fit.items;
    for (j, p) in it.params.iter().enumerate() {
        w.write_record([
            it.item_ids[j].clone(),
            num(p.a),
            num(p.b),
            num(p.c),
            num(it.a_norm[j]),
            num(it.b_norm[j]),
        ])?;
    }
    finish(w, out)
}

/// One row per respondent: id, kind, theta, posterior sd, true score and raw
/// accuracy.
pub fn write_respondents_to<W: Write>(
    rm: &ResponseMatrix,
    fit: &FitResult,
    out: &mut W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "respondent",
        "kind",
        "theta",
        "sd",
        "true_score",
        "accuracy",
    ])?;
    let acc = rm.row_accuracy();
    for (r, resp) in rm.respondents().iter().enumerate() {
        w.write_record([
            resp.id.clone(),
            resp.kind.to_string(),
            num(fit.abilities.theta[r]),
            num(fit.abilities.sd[r]),
            num(fit.true_scores[r]),
            num(acc[r]),
        ])?;
    }
    finish(w, out)
}

/// Writes `items.csv` and `respondents.csv` into `dir`.
pub fn write_fit(rm: &ResponseMatrix, fit: &FitResult, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    let mut buf = Vec::new();
    write_items_to(fit, &mut buf)?;
    write_file(&dir.join("items.csv"), &buf)?;
    buf.clear();
    write_respondents_to(rm, fit, &mut buf)?;
    write_file(&dir.join("respondents.csv"), &buf)
}
