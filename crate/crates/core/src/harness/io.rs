//! Comma-separated matrices: no header, one row per line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{Result, RifleError};
use crate::linalg::{check_dim, MatrixPair, SymMatrix};

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> RifleError {
    RifleError::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Reads a dense numeric matrix. Blank lines are skipped; every other line
/// must have the same number of fields.
pub fn read_matrix_csv(path: &Path) -> Result<Array2<f64>> {
    let file = File::open(path).map_err(|e| RifleError::Io(format!("{}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_error(path, line, e.to_string())
        })?;
        let line = record.position().map_or(rows + 1, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(parse_error(
                    path,
                    line,
                    format!("expected {c} fields, found {}", record.len()),
                ))
            }
            _ => {}
        }
        for field in record.iter() {
            let x: f64 = field
                .parse()
                .map_err(|_| parse_error(path, line, format!("not a number: {field:?}")))?;
            if !x.is_finite() {
                return Err(parse_error(path, line, format!("non-finite value {field:?}")));
            }
            values.push(x);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| parse_error(path, 1, "empty file"))?;
    Ok(Array2::from_shape_vec((rows, cols), values).expect("rows have equal length"))
}

/// A pencil read from disk, with notes about inputs that had to be repaired.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedPair {
    pub pair: MatrixPair,
    pub warnings: Vec<String>,
}

fn load_symmetric(path: &Path, name: &str, warnings: &mut Vec<String>) -> Result<SymMatrix> {
    let m = SymMatrix::new(read_matrix_csv(path)?)?;
    if m.was_asymmetric() {
        warnings.push(format!(
            "{name} ({}) was not symmetric (largest correction {:e}); using (M + Mᵀ)/2",
            path.display(),
            m.asymmetry()
        ));
    }
    Ok(m)
}

pub fn load_pair_csv(path_a: &Path, path_b: &Path) -> Result<LoadedPair> {
    let mut warnings = Vec::new();
    let a = load_symmetric(path_a, "A", &mut warnings)?;
    let b = load_symmetric(path_b, "B", &mut warnings)?;
    check_dim(a.dim(), b.dim())?;
    Ok(LoadedPair {
        pair: MatrixPair::new(a, b)?,
        warnings,
    })
}

/// Writes values with the shortest representation that reads back exactly.
pub fn write_matrix_csv(path: &Path, m: &ArrayView2<f64>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// One value per line.
pub fn write_vector_csv(path: &Path, v: &ArrayView1<f64>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for x in v {
        writeln!(out, "{x}")?;
    }
    out.flush()?;
    Ok(())
}
