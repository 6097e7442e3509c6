//! File formats for response matrices, predictions, fitted parameters,
//! run reports and plot data.

mod matrix;
mod params;
mod plots;
mod tables;

pub use matrix::{
    read_predictions, read_predictions_from, read_response_matrix, read_response_matrix_from,
    write_predictions, write_predictions_to, write_response_matrix, write_response_matrix_to,
    PredictionSet,
};
pub use params::{write_fit, write_items_to, write_respondents_to};
pub use plots::{
    emit_ability_accuracy, emit_bin_histogram, emit_item_scatter, AbilityPoint, BinBar, ItemPoint,
    PlotKind, PlotSeries,
};
pub use tables::{
    report_json, run_dir_name, write_complexity_to, write_run_dir, write_summary_to, ReportFile,
    SUMMARY_HEADER,
};

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;
const VERSION_PREFIX: &str = "# format_version=";

/// Twelve significant digits in scientific notation.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

/// Rounds to twelve significant digits.
pub fn round12(x: f64) -> f64 {
    if x.is_finite() {
        num(x).parse().expect("formatted float parses")
    } else {
        x
    }
}

fn version_line() -> String {
    format!("{VERSION_PREFIX}{FORMAT_VERSION}\n")
}

/// Strips and checks a leading version comment. Files without one are
/// accepted as current.
fn check_version(text: &str) -> Result<()> {
    if let Some(first) = text.lines().next() {
        if let Some(v) = first.trim().strip_prefix(VERSION_PREFIX) {
            let v: u32 = v.trim().parse().map_err(|_| Error::Parse {
                line: 1,
                message: format!("bad format version {v:?}"),
            })?;
            if v != FORMAT_VERSION {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("unsupported format version {v}, expected {FORMAT_VERSION}"),
                });
            }
        }
    }
    Ok(())
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

fn io_err(e: std::io::Error) -> Error {
    Error::Serde(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(0.1), "1.00000000000e-1");
        assert_eq!(num(-1234.5), "-1.23450000000e3");
        assert_eq!(round12(1.0 / 3.0), 0.333333333333);
    }

    #[test]
    fn version_comment() {
        assert!(check_version("# format_version=1\na,b\n").is_ok());
        assert!(check_version("a,b\n").is_ok());
        assert!(check_version("# format_version=9\na,b\n").is_err());
    }
}
