//! CSV and JSON files: comma separated, mandatory header, LF line endings,
//! floats in shortest round-trip scientific notation.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, Result};

/// A sink that is either a file or stdout.
pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| CliError::io(p, e))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn display(path: Option<&Path>) -> PathBuf {
    path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf)
}

pub fn csv_writer(out: Box<dyn Write>) -> csv::Writer<Box<dyn Write>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

pub fn float(v: f64) -> String {
    format!("{v:e}")
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => CliError::io(path, e),
        other => CliError::Parse {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

/// Write named columns of equal length.
pub fn write_columns<T>(path: Option<&Path>, names: &[String], columns: &[Vec<T>], fmt: impl Fn(&T) -> String) -> Result<()> {
    let shown = display(path);
    let mut w = csv_writer(open_output(path)?);
    w.write_record(names).map_err(|e| csv_err(&shown, e))?;
    let n = columns.first().map_or(0, Vec::len);
    let mut record = Vec::with_capacity(columns.len());
    for t in 0..n {
        record.clear();
        record.extend(columns.iter().map(|c| fmt(&c[t])));
        w.write_record(&record).map_err(|e| csv_err(&shown, e))?;
    }
    w.flush().map_err(|e| CliError::io(&shown, e))
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let shown = display(path);
    let mut out = open_output(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::io(&shown, e.into()))?;
    out.write_all(b"\n").map_err(|e| CliError::io(&shown, e))?;
    out.flush().map_err(|e| CliError::io(&shown, e))
}

/// A table read from CSV: header names and raw cells, column-major.
pub struct Table {
    pub names: Vec<String>,
    pub columns: Vec<Vec<String>>,
}

pub fn read_csv(path: &Path) -> Result<Table> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| CliError::io(path, e))?;
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let names: Vec<String> = r
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(|h| h.trim().to_owned())
        .collect();
    if names.iter().any(String::is_empty) {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            message: "line 1: empty column name in header".into(),
        });
    }
    let mut columns = vec![Vec::new(); names.len()];
    for rec in r.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Parse {
                path: path.to_path_buf(),
                message: format!("line {line}: {e}"),
            }
        })?;
        for (col, cell) in columns.iter_mut().zip(rec.iter()) {
            col.push(cell.trim().to_owned());
        }
    }
    Ok(Table { names, columns })
}

/// Parse a column as reals, reporting the 1-based file line of a bad cell.
pub fn parse_reals(path: &Path, name: &str, cells: &[String]) -> Result<Vec<f64>> {
    cells
        .iter()
        .enumerate()
        .map(|(k, c)| {
            c.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| CliError::Parse {
                path: path.to_path_buf(),
                message: format!("line {}: column {name}: {c:?} is not a finite number", k + 2),
            })
        })
        .collect()
}

/// Parse a column as symbols, or `None` if any cell is not a nonnegative
/// integer.
pub fn parse_symbols(cells: &[String]) -> Option<Vec<usize>> {
    cells.iter().map(|c| c.parse::<usize>().ok()).collect()
}
