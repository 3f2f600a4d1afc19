//! CSV interchange for samples, curves and scores.
//!
//! Numeric CSV has a header row and comma-separated `.`-decimal cells. Curve
//! files have no header: the first row is the grid and every later row one
//! curve. Errors name the offending line (1-based, as shown by an editor).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kl::CurveSet;

fn open(path: &Path, has_headers: bool) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    Ok(csv::ReaderBuilder::new().has_headers(has_headers).trim(csv::Trim::All).from_reader(file))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line());
    match (e.kind(), line) {
        (csv::ErrorKind::UnequalLengths { expected_len, len, .. }, Some(line)) => {
            Error::Input(format!("{}: line {line}: expected {expected_len} fields, found {len}", path.display()))
        }
        (_, Some(line)) => Error::Input(format!("{}: line {line}: {e}", path.display())),
        _ => Error::Input(format!("{}: {e}", path.display())),
    }
}

fn parse_cell(path: &Path, line: u64, column: usize, cell: &str) -> Result<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => {
            Err(Error::Input(format!("{}: line {line}, column {column}: non-finite value '{cell}'", path.display())))
        }
        Err(_) => {
            Err(Error::Input(format!("{}: line {line}, column {column}: non-numeric value '{cell}'", path.display())))
        }
    }
}

fn read_rows(path: &Path, has_headers: bool) -> Result<(Vec<Vec<f64>>, usize)> {
    let mut reader = open(path, has_headers)?;
    let width = if has_headers { reader.headers().map_err(|e| csv_error(path, e))?.len() } else { 0 };
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .iter()
            .enumerate()
            .map(|(j, cell)| parse_cell(path, line, j + 1, cell))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((rows, width))
}

/// Reads an `n × p` numeric matrix from a CSV file with a header row.
pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let (rows, width) = read_rows(path, true)?;
    if rows.is_empty() {
        return Err(Error::Input(format!("{}: no data rows", path.display())));
    }
    Ok(DMatrix::from_fn(rows.len(), width, |i, j| rows[i][j]))
}

/// Reads a curve file: grid on the first row, one curve per later row.
pub fn read_curves_csv(path: &Path) -> Result<CurveSet> {
    let (mut rows, _) = read_rows(path, false)?;
    if rows.len() < 2 {
        return Err(Error::Input(format!("{}: need a grid row and at least one curve", path.display())));
    }
    let grid = rows.remove(0);
    let values = DMatrix::from_fn(rows.len(), grid.len(), |i, j| rows[i][j]);
    CurveSet::new(grid, values).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

/// Writes a matrix with the given header, using shortest round-trip formatting.
pub fn write_matrix<W: Write>(header: &[String], m: &DMatrix<f64>, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_curves<W: Write>(cs: &CurveSet, mut out: W) -> std::io::Result<()> {
    let grid: Vec<String> = cs.grid.iter().map(|v| v.to_string()).collect();
    writeln!(out, "{}", grid.join(","))?;
    for i in 0..cs.n() {
        let row: Vec<String> = cs.values.row(i).iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Creates `path` for buffered writing.
pub fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn reads_matrix_with_header() {
        let f = file("a,b\n1,2\n3.5, -4e-1\n");
        let m = read_matrix_csv(f.path()).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.5, -0.4]));
    }

    #[test]
    fn ragged_and_non_numeric_rows_name_the_line() {
        let f = file("a,b\n1,2\n3\n");
        let msg = read_matrix_csv(f.path()).unwrap_err().to_string();
        assert!(msg.contains("line 3"), "{msg}");
        let f = file("a,b\n1,2\n3,4\nx,5\n");
        let msg = read_matrix_csv(f.path()).unwrap_err().to_string();
        assert!(msg.contains("line 4") && msg.contains("'x'"), "{msg}");
        let f = file("a\nNaN\n");
        assert!(read_matrix_csv(f.path()).unwrap_err().to_string().contains("non-finite"));
    }

    #[test]
    fn curves_round_trip() {
        let cs =
            CurveSet::new(vec![0.0, 0.5, 1.0], DMatrix::from_row_slice(2, 3, &[1.0, 0.1, 2.0, 3.0, 1.0 / 3.0, 4.0]))
                .unwrap();
        let mut buf = Vec::new();
        write_curves(&cs, &mut buf).unwrap();
        let f = file(std::str::from_utf8(&buf).unwrap());
        assert_eq!(read_curves_csv(f.path()).unwrap(), cs);
    }

    #[test]
    fn missing_file_is_an_input_error() {
        assert!(matches!(read_matrix_csv(Path::new("/no/such/file.csv")), Err(Error::Input(_))));
    }
}
