//! CSV ingestion and export of (y, X) samples.

use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CsvOptions {
    pub header: bool,
    /// 1-based column holding the response.
    pub response_col: usize,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self { header: false, response_col: 1 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub y: DVector<f64>,
    pub x: DMatrix<f64>,
    pub response_name: Option<String>,
    /// Predictor names in column order, when the file has a header.
    pub predictor_names: Option<Vec<String>>,
}

/// Read a numeric CSV. Every data row must have the same width and every cell
/// must parse as a finite number; the first offending cell is reported with its
/// 1-based file line and column.
pub fn ingest_csv(path: &Path, opts: CsvOptions) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_csv(file, path, opts)
}

pub fn read_csv<R: std::io::Read>(reader: R, path: &Path, opts: CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(opts.header).trim(csv::Trim::All).from_reader(reader);
    let parse_err = |line: u64, column: usize, message: String| CliError::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message,
    };
    let map_csv = |e: csv::Error| -> CliError {
        let line = e.position().map_or(0, |p| p.line());
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path, io),
            csv::ErrorKind::UnequalLengths { expected_len, len, .. } => parse_err(
                line,
                (len.min(expected_len) + 1) as usize,
                format!("expected {expected_len} fields, found {len}"),
            ),
            csv::ErrorKind::Utf8 { err, .. } => parse_err(line, err.field() + 1, "invalid UTF-8".into()),
            other => parse_err(line, 1, format!("{other:?}")),
        }
    };

    let header: Option<Vec<String>> =
        if opts.header { Some(rdr.headers().map_err(map_csv)?.iter().map(str::to_string).collect()) } else { None };

    let mut width = None;
    let mut values = Vec::new();
    let mut rows = 0usize;
    for rec in rdr.records() {
        let rec = rec.map_err(map_csv)?;
        let line = rec.position().map_or(0, |p| p.line());
        let w = *width.get_or_insert(rec.len());
        if opts.response_col == 0 || opts.response_col > w {
            return Err(CliError::Input(format!(
                "response column {} is outside the {w} columns of {}",
                opts.response_col,
                path.display()
            )));
        }
        if w < 2 {
            return Err(parse_err(line, 1, "need a response and at least one predictor".into()));
        }
        for (j, cell) in rec.iter().enumerate() {
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => return Err(parse_err(line, j + 1, format!("`{cell}` is not a finite number"))),
            }
        }
        rows += 1;
    }
    let Some(w) = width else {
        return Err(CliError::EmptyFile(path.to_path_buf()));
    };

    let rc = opts.response_col - 1;
    let cell = |i: usize, j: usize| values[i * w + j];
    let y = DVector::from_fn(rows, |i, _| cell(i, rc));
    let x = DMatrix::from_fn(rows, w - 1, |i, j| cell(i, if j < rc { j } else { j + 1 }));
    let (response_name, predictor_names) = match header {
        Some(mut names) => {
            if names.len() != w {
                return Err(parse_err(1, names.len().min(w) + 1, format!("header has {} fields, data {w}", names.len())));
            }
            let r = names.remove(rc);
            (Some(r), Some(names))
        }
        None => (None, None),
    };
    Ok(Dataset { y, x, response_name, predictor_names })
}

/// Write y in the first column and X after it. Values use the shortest decimal
/// form that parses back to the same f64.
pub fn write_csv(path: &Path, y: &DVector<f64>, x: &DMatrix<f64>, names: Option<&[String]>) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(CliError::Input(format!("y has {} rows, X has {}", y.len(), x.nrows())));
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    if let Some(names) = names {
        w.write_record(names).map_err(|e| csv_io(path, e))?;
    }
    let mut row = Vec::with_capacity(x.ncols() + 1);
    for i in 0..y.len() {
        row.clear();
        row.push(y[i].to_string());
        row.extend(x.row(i).iter().map(f64::to_string));
        w.write_record(&row).map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn csv_io(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Input(format!("{}: {other:?}", path.display())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str, opts: CsvOptions) -> Result<Dataset> {
        read_csv(text.as_bytes(), Path::new("mem.csv"), opts)
    }

    #[test]
    fn shapes_without_header() {
        let d = read("1,2,3\n4,5,6\n7,8,9\n", CsvOptions::default()).unwrap();
        assert_eq!(d.y.as_slice(), &[1.0, 4.0, 7.0]);
        assert_eq!((d.x.nrows(), d.x.ncols()), (3, 2));
        assert_eq!(d.x[(2, 1)], 9.0);
        assert!(d.predictor_names.is_none());
    }

    #[test]
    fn header_names_are_recorded() {
        let d = read("y,x1,x2\n1,2,3\n4,5,6\n7,8,9\n", CsvOptions { header: true, response_col: 1 }).unwrap();
        assert_eq!((d.x.nrows(), d.x.ncols()), (3, 2));
        assert_eq!(d.response_name.as_deref(), Some("y"));
        assert_eq!(d.predictor_names.unwrap(), vec!["x1", "x2"]);
    }

    #[test]
    fn response_column_override() {
        let d = read("1,2,3\n4,5,6\n", CsvOptions { header: false, response_col: 3 }).unwrap();
        assert_eq!(d.y.as_slice(), &[3.0, 6.0]);
        assert_eq!(d.x.row(1).iter().copied().collect::<Vec<_>>(), vec![4.0, 5.0]);
    }

    #[test]
    fn bad_cell_reports_line_and_column() {
        match read("1,2,3\n4,abc,6\n", CsvOptions::default()) {
            Err(CliError::Parse { line, column, .. }) => assert_eq!((line, column), (2, 2)),
            other => panic!("{other:?}"),
        }
        match read("y,a\n1,2\n3,nan\n", CsvOptions { header: true, response_col: 1 }) {
            Err(CliError::Parse { line, column, .. }) => assert_eq!((line, column), (3, 2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ragged_row_is_a_parse_error() {
        assert!(matches!(read("1,2,3\n4,5\n", CsvOptions::default()), Err(CliError::Parse { line: 2, .. })));
    }

    #[test]
    fn empty_inputs() {
        assert!(matches!(read("", CsvOptions::default()), Err(CliError::EmptyFile(_))));
        assert!(matches!(read("y,x\n", CsvOptions { header: true, response_col: 1 }), Err(CliError::EmptyFile(_))));
    }
}
