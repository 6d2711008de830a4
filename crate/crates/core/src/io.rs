//! Matrix CSV reading and writing.
//!
//! One row per line, comma separated, no header unless requested. Values are
//! written with 17 significant digits so files round-trip exactly.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

/// Absolute symmetry tolerance applied when loading a symmetric matrix.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Formats a value with 17 significant digits.
pub fn format_value(v: f64) -> String {
    format!("{:.16e}", v)
}

/// Reads a rectangular numeric CSV.
pub fn read_matrix<R: Read>(reader: R, header: bool) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(header)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("row {}: cannot parse {:?}", line + 1, f)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse(format!(
                    "row {} has {} fields, expected {}",
                    line + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyData);
    }
    let ncol = rows[0].len();
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    let m = DMatrix::from_row_slice(rows.len(), ncol, &flat);
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidMatrix("non-finite entry".into()));
    }
    Ok(m)
}

pub fn read_matrix_file(path: &Path, header: bool) -> Result<DMatrix<f64>> {
    read_matrix(File::open(path)?, header)
}

/// Reads a symmetric matrix, rejecting asymmetry beyond [`SYMMETRY_TOL`].
pub fn read_sym_matrix_file(path: &Path, header: bool) -> Result<SymMatrix> {
    SymMatrix::from_dmatrix_checked(read_matrix_file(path, header)?, SYMMETRY_TOL)
}

pub fn write_matrix<W: Write>(mut w: W, m: &DMatrix<f64>) -> Result<()> {
    for i in 0..m.nrows() {
        let line: Vec<String> = (0..m.ncols()).map(|j| format_value(m[(i, j)])).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn matrix_to_string(m: &DMatrix<f64>) -> String {
    let mut buf = Vec::new();
    write_matrix(&mut buf, m).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}
