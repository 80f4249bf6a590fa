//! Matrix file formats.
//!
//! Two formats are supported:
//!
//! * **CSV** — one row per line, comma-separated decimal floats, optionally
//!   preceded by a single header line starting with `#`. Values are written
//!   with Rust's shortest round-trip formatting, so a write–read cycle
//!   reproduces every `f64` exactly.
//! * **raw-f64** — a 16-byte little-endian header (`rows: u64`, `cols: u64`)
//!   followed by `rows·cols` little-endian 64-bit floats in row-major order.
//!   Bit-exact by construction.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

/// On-disk matrix encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    RawF64,
}

impl MatrixFormat {
    /// Chooses a format from a file extension: `.f64` and `.raw` are binary,
    /// everything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("f64") | Some("raw") => MatrixFormat::RawF64,
            _ => MatrixFormat::Csv,
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            MatrixFormat::Csv => "csv",
            MatrixFormat::RawF64 => "f64",
        }
    }
}

impl std::str::FromStr for MatrixFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(MatrixFormat::Csv),
            "raw-f64" | "raw" | "f64" => Ok(MatrixFormat::RawF64),
            other => Err(Error::InvalidArgument(format!(
                "unknown matrix format {other:?}; expected csv or raw-f64"
            ))),
        }
    }
}

/// Parses CSV text into a matrix. Lines are 1-indexed and columns are
/// 1-indexed fields for error reporting.
pub fn matrix_from_csv_str(text: &str) -> Result<FeatureMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut cols = 0usize;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if idx == 0 && line.trim_start().starts_with('#') {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for (field_idx, field) in line.split(',').enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| Error::Parse {
                line: line_no,
                column: field_idx + 1,
                message: format!("{:?} is not a decimal float", field.trim()),
            })?;
            row.push(value);
        }
        if cols == 0 {
            cols = row.len();
        } else if row.len() != cols {
            return Err(Error::Parse {
                line: line_no,
                column: row.len(),
                message: format!("expected {cols} fields, found {}", row.len()),
            });
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "no data rows".into(),
        });
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    FeatureMatrix::from_row_major(flat.len() / cols, cols, &flat)
}

/// Renders a matrix as CSV text.
pub fn matrix_to_csv_string(m: &FeatureMatrix) -> String {
    let mut out = String::new();
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            if c > 0 {
                out.push(',');
            }
            out.push_str(&m.get(r, c).to_string());
        }
        out.push('\n');
    }
    out
}

fn matrix_from_raw_bytes(bytes: &[u8]) -> Result<FeatureMatrix> {
    let header_err = |message: String| Error::Parse {
        line: 0,
        column: 0,
        message,
    };
    if bytes.len() < 16 {
        return Err(header_err(format!(
            "raw-f64 file needs a 16-byte header, found {} bytes",
            bytes.len()
        )));
    }
    let rows = u64::from_le_bytes(bytes[0..8].try_into().expect("8 bytes")) as usize;
    let cols = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(16))
        .ok_or_else(|| header_err(format!("dimensions {rows}x{cols} overflow")))?;
    if bytes.len() != expected {
        return Err(header_err(format!(
            "raw-f64 file for {rows}x{cols} must be {expected} bytes, found {}",
            bytes.len()
        )));
    }
    let mut values = Vec::with_capacity(rows * cols);
    for chunk in bytes[16..].chunks_exact(8) {
        values.push(f64::from_le_bytes(chunk.try_into().expect("8 bytes")));
    }
    FeatureMatrix::from_row_major(rows, cols, &values)
}

fn matrix_to_raw_bytes(m: &FeatureMatrix) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(16 + m.rows() * m.cols() * 8);
    bytes.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    bytes.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for value in m.to_row_major() {
        bytes.extend_from_slice(&value.to_le_bytes());
    }
    bytes
}

/// Reads a matrix, choosing the format from the file extension.
pub fn read_matrix(path: &Path) -> Result<FeatureMatrix> {
    read_matrix_as(path, MatrixFormat::from_path(path))
}

pub fn read_matrix_as(path: &Path, format: MatrixFormat) -> Result<FeatureMatrix> {
    match format {
        MatrixFormat::Csv => matrix_from_csv_str(&fs::read_to_string(path)?),
        MatrixFormat::RawF64 => matrix_from_raw_bytes(&fs::read(path)?),
    }
}

/// Writes a matrix in the given format.
pub fn write_matrix(path: &Path, m: &FeatureMatrix, format: MatrixFormat) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut writer = BufWriter::new(file);
    match format {
        MatrixFormat::Csv => writer.write_all(matrix_to_csv_string(m).as_bytes())?,
        MatrixFormat::RawF64 => writer.write_all(&matrix_to_raw_bytes(m))?,
    }
    writer.flush()?;
    Ok(())
}
