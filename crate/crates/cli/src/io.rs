//! CSV samples and flat result tables.

use std::path::Path;

use locband_core::Sample;

use crate::error::CliError;

/// Reads a sample from a CSV file with header `x1,...,xd` and one
/// observation per row. Ragged rows are rejected with their line number.
pub fn load_sample(path: &Path) -> Result<Sample, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::from_io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(file);
    let parse_err = |line: u64, message: String| CliError::Parse { path: path.to_path_buf(), line, message };
    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let d = headers.len();
    for (i, h) in headers.iter().enumerate() {
        if h != format!("x{}", i + 1) {
            return Err(parse_err(1, format!("expected header x1,...,x{d}, found column {h:?}")));
        }
    }
    let mut data = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != d {
            return Err(parse_err(line, format!("expected {d} fields, found {}", rec.len())));
        }
        for field in rec.iter() {
            let v: f64 = field.parse().map_err(|_| parse_err(line, format!("not a real number: {field:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("not a finite number: {field:?}")));
            }
            data.push(v);
        }
    }
    Ok(Sample::from_flat(d, data)?)
}

/// Writes a sample in the format read by [`load_sample`]. Values use the
/// shortest decimal form that reads back to the same `f64` (at most 17
/// significant digits).
pub fn write_sample(path: &Path, sample: &Sample) -> Result<(), CliError> {
    let header: Vec<String> = (1..=sample.dim()).map(|i| format!("x{i}")).collect();
    let rows: Vec<Vec<String>> = sample.points().map(|p| p.iter().map(|v| v.to_string()).collect()).collect();
    write_table(path, &header.iter().map(String::as_str).collect::<Vec<_>>(), &rows)
}

pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    std::fs::write(path, table_string(header, rows)).map_err(|e| CliError::from_io(path, e))
}

/// A table rendered to CSV text, for standard output.
pub fn table_string(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}
