//! CSV and JSON file handling.

use std::fs;
use std::io::Write;
use std::path::Path;

use maxstable::{Dataset, Error};
use serde::de::DeserializeOwned;

use crate::commands::CliError;

/// 17 significant digits, round-trip exact.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::usage("Io", format!("cannot read {}: {e}", path.display())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = read_text(path)?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::from(Error::Parse(format!("{}: {e}", path.display()))))
}

/// Headered CSV, one observation per row.
pub fn read_dataset(path: &Path) -> Result<Dataset, CliError> {
    let text = read_text(path)?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, field)| {
                field.parse::<f64>().map_err(|_| {
                    Error::Parse(format!("row {}, column {}: cannot parse {field:?}", i + 1, j + 1))
                })
            })
            .collect::<Result<Vec<f64>, Error>>()?;
        rows.push(row);
    }
    Ok(Dataset::from_rows(&rows)?)
}

pub fn dataset_csv(data: &Dataset) -> String {
    let mut out = (1..=data.dim()).map(|i| format!("z_{i}")).collect::<Vec<_>>().join(",");
    out.push('\n');
    for row in data.rows() {
        out.push_str(&row.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

/// Writes `text` to `path`, or to standard output without a path.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| CliError::from(Error::Io(format!("cannot write {}: {e}", p.display())))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::from(Error::Io(e.to_string())))
        }
    }
}
