//! Report emission: JSON values with attached tolerances and deterministic
//! CSV tables.

use crate::CliError;
use moebius::MoebiusTransform;
use serde_json::{json, Value};
use std::path::Path;

/// Deterministic float formatting for CSV cells (fixed scientific form, so
/// identical runs produce byte-identical files).
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.17e}")
    }
}

/// A measured number with the tolerance it was validated against.
pub fn measured(value: f64, tol: f64) -> Value {
    json!({ "value": value, "tol": tol })
}

/// Serialize a Moebius transform as its (O, xi, lambda) factorization.
pub fn transform_json(t: &MoebiusTransform) -> Value {
    let n = t.xi().len();
    let o = t.o();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| o[(i, j)]).collect()).collect();
    json!({ "o": rows, "xi": t.xi().to_vec(), "lambda": t.lambda() })
}

/// Write a JSON report, pretty-printed with a trailing newline.
pub fn write_json(path: &Path, v: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Write a CSV table with a header row; all floats through `fmt_f64`.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}
