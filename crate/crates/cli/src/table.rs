//! CSV in and out. Numbers are written with 17 significant digits so that
//! a round trip is lossless.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::{CliError, CliResult};

pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a header and numeric rows.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| fmt(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::input(format!("cannot create {}: {e}", path.display())))?;
    write_csv(file, header, rows)
}

/// Reads the named numeric columns of a CSV with a header row.
pub fn read_columns(path: &Path, names: &[&str]) -> CliResult<Vec<Vec<f64>>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader.headers()?.clone();
    let index: Vec<usize> = names
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h.trim() == *name)
                .ok_or_else(|| CliError::input(format!("{}: missing column {name:?}", path.display())))
        })
        .collect::<CliResult<_>>()?;
    let mut cols = vec![Vec::new(); names.len()];
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        for (c, &i) in index.iter().enumerate() {
            let cell = record.get(i).unwrap_or("");
            let v: f64 = cell.trim().parse().map_err(|_| {
                CliError::input(format!("{}: row {}: {cell:?} is not a number", path.display(), line + 2))
            })?;
            cols[c].push(v);
        }
    }
    if cols[0].is_empty() {
        return Err(CliError::input(format!("{}: no data rows", path.display())));
    }
    Ok(cols)
}
