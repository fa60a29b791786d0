//! Plain numeric CSV reading and writing: comma separators, `.` decimals,
//! optional single header row, one point per row. Floats are written with 17
//! significant digits so a write-then-read round trip reproduces every f64
//! exactly.

use crate::error::{Error, Result};
use ndarray::{Array2, ArrayView2};
use std::fs;
use std::io::Write as _;
use std::path::Path;

/// Formats a float with 17 significant digits (exact f64 round trip).
pub fn format_float(v: f64) -> String {
    format!("{:.16e}", v)
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Splits a file into trimmed cells. Blank lines are skipped; a trailing
/// newline does not produce an empty record.
pub fn read_cells(path: &Path) -> Result<Vec<Vec<String>>> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    Ok(split_cells(&text))
}

/// Cell-splits CSV text (shared by file and in-memory callers).
pub fn split_cells(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|line| !line.trim().is_empty())
        .map(|line| line.split(',').map(|c| c.trim().to_string()).collect())
        .collect()
}

/// Parses pre-split cells into a rectangular numeric matrix.
///
/// `first_data_row` is the 1-based file row of `cells[0]`, so error
/// coordinates refer to the original file even when a header was removed.
pub fn parse_matrix(cells: &[Vec<String>], first_data_row: usize) -> Result<Array2<f64>> {
    if cells.is_empty() {
        return Err(Error::InvalidParameter("empty table".into()));
    }
    let ncols = cells[0].len();
    let mut data = Vec::with_capacity(cells.len() * ncols);
    for (r, row) in cells.iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::Parse {
                row: first_data_row + r,
                col: row.len().min(ncols) + 1,
                message: format!("ragged row: expected {} cells, found {}", ncols, row.len()),
            });
        }
        for (c, cell) in row.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row: first_data_row + r,
                col: c + 1,
                message: format!("not a number: {cell:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: first_data_row + r,
                    col: c + 1,
                    message: format!("non-finite value: {cell:?}"),
                });
            }
            data.push(v);
        }
    }
    Array2::from_shape_vec((cells.len(), ncols), data)
        .map_err(|e| Error::DimensionMismatch(e.to_string()))
}

/// Reads a rectangular numeric matrix, optionally skipping one header row.
pub fn read_matrix(path: &Path, has_header: bool) -> Result<Array2<f64>> {
    let cells = read_cells(path)?;
    let skip = usize::from(has_header);
    if cells.len() <= skip.saturating_sub(1) || cells.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no data rows in {}",
            path.display()
        )));
    }
    parse_matrix(&cells[skip..], skip + 1)
}

/// Writes a matrix as CSV with 17-significant-digit floats.
pub fn write_matrix(path: &Path, m: &ArrayView2<f64>, header: Option<&[String]>) -> Result<()> {
    let mut out = String::new();
    if let Some(names) = header {
        out.push_str(&names.join(","));
        out.push('\n');
    }
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// Writes a single integer column (used for label files).
pub fn write_label_column(path: &Path, labels: &[usize]) -> Result<()> {
    let mut out = String::new();
    for l in labels {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// Reads a single nonnegative-integer column.
pub fn read_label_column(path: &Path) -> Result<Vec<usize>> {
    let cells = read_cells(path)?;
    let mut labels = Vec::with_capacity(cells.len());
    for (r, row) in cells.iter().enumerate() {
        if row.len() != 1 {
            return Err(Error::Parse {
                row: r + 1,
                col: 2,
                message: "label files carry exactly one column".into(),
            });
        }
        let l: usize = row[0].parse().map_err(|_| Error::Parse {
            row: r + 1,
            col: 1,
            message: format!("not a nonnegative integer: {:?}", row[0]),
        })?;
        labels.push(l);
    }
    Ok(labels)
}

/// Writes bytes through a same-directory temp file and rename, so partially
/// written outputs never masquerade as finished artifacts.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir).map_err(|e| io_err(path, e))?;
    }
    let tmp = path.with_extension("tmp-partial");
    {
        let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
        f.write_all(bytes).map_err(|e| io_err(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}
