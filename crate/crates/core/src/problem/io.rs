//! Headerless numeric CSV, one matrix row per line.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::Mat;
use crate::scalar::Scalar;

pub fn load_matrix_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<Mat<T>> {
    let file = File::open(path)?;
    parse_matrix_csv(file)
}

pub fn parse_matrix_csv<T: Scalar>(input: impl Read) -> Result<Mat<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut entries: Vec<T> = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for record in reader.records() {
        let record = record?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let expected = *cols.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRow {
                row: rows,
                expected,
                found: record.len(),
            });
        }
        for (col, cell) in record.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| Error::UnparseableCell {
                row: rows,
                col,
                cell: cell.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::NonFiniteCell {
                    row: rows,
                    col,
                    cell: cell.to_string(),
                });
            }
            entries.push(T::of(value));
        }
        rows += 1;
    }
    match cols {
        Some(c) if rows > 0 => Mat::from_row_major(rows, c, &entries),
        _ => Err(Error::EmptyCsv),
    }
}

/// Writes entries with shortest round-trip formatting, so reloading
/// reproduces the matrix bit for bit.
pub fn write_matrix_csv<T: Scalar>(path: impl AsRef<Path>, m: &Mat<T>) -> Result<()> {
    let mut out = std::io::BufWriter::new(File::create(path)?);
    for i in 0..m.rows() {
        let line: Vec<String> = (0..m.cols()).map(|j| format!("{}", m[(i, j)])).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Mat<f64>> {
        parse_matrix_csv(s.as_bytes())
    }

    #[test]
    fn parses_rectangular_input() {
        assert_eq!(parse("1,2\n3,4\n").unwrap(), Mat::from_rows(&[[1.0, 2.0], [3.0, 4.0]]));
        assert_eq!(parse("1.5e-3, -2\n").unwrap(), Mat::from_rows(&[[1.5e-3, -2.0]]));
    }

    #[test]
    fn distinct_errors() {
        assert!(matches!(
            parse("1,2\n3\n"),
            Err(Error::RaggedRow {
                row: 1,
                expected: 2,
                found: 1
            })
        ));
        assert!(matches!(
            parse("1,x\n"),
            Err(Error::UnparseableCell { row: 0, col: 1, .. })
        ));
        assert!(matches!(parse("1,nan\n"), Err(Error::NonFiniteCell { .. })));
        assert!(matches!(parse("inf\n"), Err(Error::NonFiniteCell { .. })));
        assert!(matches!(parse(""), Err(Error::EmptyCsv)));
    }

    #[test]
    fn file_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = Mat::<f64>::from_rows(&[[0.1, 1.0 / 3.0], [-2e-300, 12345.678]]);
        write_matrix_csv(&path, &m).unwrap();
        assert_eq!(load_matrix_csv::<f64>(&path).unwrap(), m);
        assert!(matches!(
            load_matrix_csv::<f64>(dir.path().join("missing.csv")),
            Err(Error::Io(_))
        ));
    }
}
