//! Plain-text CSV formats.
//!
//! * data: one point per row, `D` comma-separated floats (17 significant digits)
//! * labels: one integer per line
//! * adjacency: dense `N × N` rows

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::adjacency::Adjacency;
use crate::error::{Error, Result};
use crate::synth::DataSet;

fn fmt_row(out: &mut String, values: impl Iterator<Item = f64>) {
    for (i, v) in values.enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{v:.16e}");
    }
    out.push('\n');
}

/// Points of a `D × N` matrix as `N` rows.
pub fn points_to_csv(points: &DMatrix<f64>) -> String {
    let mut s = String::new();
    for c in points.column_iter() {
        fmt_row(&mut s, c.iter().copied());
    }
    s
}

pub fn labels_to_csv(labels: &[usize]) -> String {
    let mut s = String::with_capacity(labels.len() * 2);
    for l in labels {
        let _ = writeln!(s, "{l}");
    }
    s
}

pub fn adjacency_to_csv(adj: &Adjacency) -> String {
    let mut s = String::new();
    for r in adj.weights().row_iter() {
        fmt_row(&mut s, r.iter().copied());
    }
    s
}

fn is_blank(line: &str) -> bool {
    line.trim().is_empty()
}

/// Parse a rectangular numeric CSV with one point per row into a `D × N` matrix.
/// Blank lines are skipped; line numbers in errors are 1-based.
pub fn parse_points_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if is_blank(line) {
            continue;
        }
        let row = line
            .split(',')
            .enumerate()
            .map(|(col, cell)| {
                cell.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("column {}: '{}' is not a number", col + 1, cell.trim()),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("row {} has {} fields, expected {w}", rows.len(), row.len()),
                })
            }
            _ => {}
        }
        if let Some(bad) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse { line: line_no, message: format!("column {}: non-finite value", bad + 1) });
        }
        rows.push(row);
    }
    let d = width.ok_or(Error::Parse { line: 0, message: "no data rows".into() })?;
    let n = rows.len();
    Ok(DMatrix::from_fn(d, n, |i, j| rows[j][i]))
}

pub fn parse_labels_csv(text: &str) -> Result<Vec<usize>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !is_blank(l))
        .map(|(idx, l)| {
            l.trim().parse::<usize>().map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("'{}' is not a nonnegative integer label", l.trim()),
            })
        })
        .collect()
}

pub fn read_dataset(points: &Path, labels: Option<&Path>) -> Result<DataSet> {
    let x = parse_points_csv(&fs::read_to_string(points)?)?;
    let labels = match labels {
        Some(p) => Some(parse_labels_csv(&fs::read_to_string(p)?)?),
        None => None,
    };
    DataSet::new(x, labels)
}

pub fn write_dataset(data: &DataSet, points: &Path, labels: Option<&Path>) -> Result<()> {
    fs::write(points, points_to_csv(data.points()))?;
    if let (Some(path), Some(l)) = (labels, data.labels()) {
        fs::write(path, labels_to_csv(l))?;
    }
    Ok(())
}
