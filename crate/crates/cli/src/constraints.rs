//! Constraint and penalty specification files.
//!
//! One item per line; `#` starts a comment. Indices are 1-based.
//!
//! ```text
//! p = 20                          # optional cross-check against the data
//! fused_lasso = true              # D = identity stacked on first differences
//! penalty_row = [1@3, -1@4]       # extra row of D
//! nonneg = [5, 6, 11, 12]         # beta_j >= 0
//! [-3@5, 1@10, 1@12, 1@15] = -1   # equality row of E beta = f
//! [1@2, 1@3] >= 0.5               # inequality row of C beta >= d
//! [1@7] <= 2                      # stored as -beta_7 >= -2
//! ```
//!
//! D is the identity unless `fused_lasso` or `penalty_row` says otherwise.
//! The Unicode minus sign is accepted wherever `-` is.

use std::path::Path;

use lcgqr::simulate::fused_lasso_matrix;
use lcgqr::Problem;
use nalgebra::{DMatrix, DVector};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet {
    pub penalty: DMatrix<f64>,
    pub ineq: DMatrix<f64>,
    pub ineq_rhs: DVector<f64>,
    pub eq: DMatrix<f64>,
    pub eq_rhs: DVector<f64>,
}

impl ConstraintSet {
    /// Plain lasso, no constraints.
    pub fn lasso(p: usize) -> Self {
        Self {
            penalty: DMatrix::identity(p, p),
            ineq: DMatrix::zeros(0, p),
            ineq_rhs: DVector::zeros(0),
            eq: DMatrix::zeros(0, p),
            eq_rhs: DVector::zeros(0),
        }
    }

    pub fn into_problem(self, y: DVector<f64>, x: DMatrix<f64>, tau: f64) -> lcgqr::Result<Problem> {
        Problem::new(y, x, self.penalty, self.ineq, self.ineq_rhs, self.eq, self.eq_rhs, tau)
    }
}

pub fn read_constraints(path: &Path, p: usize) -> Result<ConstraintSet> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_constraints(&text, p)
}

type Row = Vec<(usize, f64)>;

/// Parse a spec against a design with `p` predictors.
pub fn parse_constraints(text: &str, p: usize) -> Result<ConstraintSet> {
    let mut fused = false;
    let mut penalty_rows: Vec<Row> = Vec::new();
    let mut ineq: Vec<(Row, f64)> = Vec::new();
    let mut eq: Vec<(Row, f64)> = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.split('#').next().unwrap_or("").replace('\u{2212}', "-");
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |message: String| CliError::SpecSyntax { line: line_no, message };

        if line.starts_with('[') {
            let close = line.find(']').ok_or_else(|| syntax("missing `]`".into()))?;
            let row = parse_terms(&line[1..close], p, line_no)?;
            let rest = line[close + 1..].trim();
            let (op, rhs) = if let Some(r) = rest.strip_prefix(">=") {
                (">=", r)
            } else if let Some(r) = rest.strip_prefix("<=") {
                ("<=", r)
            } else if let Some(r) = rest.strip_prefix('=') {
                ("=", r)
            } else {
                return Err(syntax(format!("expected `=`, `>=` or `<=` after the terms, found `{rest}`")));
            };
            let rhs = parse_number(rhs.trim()).ok_or_else(|| syntax(format!("bad right-hand side `{}`", rhs.trim())))?;
            match op {
                "=" => eq.push((row, rhs)),
                ">=" => ineq.push((row, rhs)),
                _ => ineq.push((row.into_iter().map(|(j, c)| (j, -c)).collect(), -rhs)),
            }
            continue;
        }

        let (key, value) = line.split_once('=').ok_or_else(|| syntax(format!("expected `key = value`, found `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "p" => {
                let declared: usize = value.parse().map_err(|_| syntax(format!("bad dimension `{value}`")))?;
                if declared != p {
                    return Err(CliError::SpecDimensionMismatch(format!(
                        "line {line_no} declares p = {declared}, the data have {p} predictors"
                    )));
                }
            }
            "fused_lasso" => {
                fused = match value {
                    "true" => true,
                    "false" => false,
                    _ => return Err(syntax(format!("fused_lasso takes true or false, found `{value}`"))),
                };
            }
            "penalty_row" => penalty_rows.push(parse_terms(bracketed(value, line_no)?, p, line_no)?),
            "nonneg" => {
                for item in bracketed(value, line_no)?.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let j = parse_index(item, p, line_no)?;
                    ineq.push((vec![(j, 1.0)], 0.0));
                }
            }
            other => return Err(CliError::UnknownKey { line: line_no, key: other.to_string() }),
        }
    }

    let mut d_rows: Vec<DMatrix<f64>> = Vec::new();
    if fused {
        d_rows.push(fused_lasso_matrix(p));
    }
    if !penalty_rows.is_empty() {
        d_rows.push(dense(&penalty_rows, p));
    }
    let penalty = if d_rows.is_empty() { DMatrix::identity(p, p) } else { vstack(&d_rows, p) };
    let (c_rows, d): (Vec<Row>, Vec<f64>) = ineq.into_iter().unzip();
    let (e_rows, f): (Vec<Row>, Vec<f64>) = eq.into_iter().unzip();
    Ok(ConstraintSet {
        penalty,
        ineq: dense(&c_rows, p),
        ineq_rhs: DVector::from_vec(d),
        eq: dense(&e_rows, p),
        eq_rhs: DVector::from_vec(f),
    })
}

fn bracketed(value: &str, line: usize) -> Result<&str> {
    value
        .strip_prefix('[')
        .and_then(|v| v.strip_suffix(']'))
        .ok_or_else(|| CliError::SpecSyntax { line, message: format!("expected a `[...]` list, found `{value}`") })
}

fn parse_number(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_index(s: &str, p: usize, line: usize) -> Result<usize> {
    let j: usize = s.parse().map_err(|_| CliError::SpecSyntax { line, message: format!("bad index `{s}`") })?;
    if j == 0 || j > p {
        return Err(CliError::SpecDimensionMismatch(format!("line {line}: index {j} outside 1..={p}")));
    }
    Ok(j - 1)
}

/// `coef@index` terms; repeated indices add up.
fn parse_terms(body: &str, p: usize, line: usize) -> Result<Row> {
    let mut row: Row = Vec::new();
    for term in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (coef, idx) = term
            .split_once('@')
            .ok_or_else(|| CliError::SpecSyntax { line, message: format!("term `{term}` is not `coef@index`") })?;
        let coef = parse_number(coef.trim())
            .ok_or_else(|| CliError::SpecSyntax { line, message: format!("bad coefficient in `{term}`") })?;
        row.push((parse_index(idx.trim(), p, line)?, coef));
    }
    if row.is_empty() {
        return Err(CliError::SpecSyntax { line, message: "empty term list".into() });
    }
    Ok(row)
}

fn dense(rows: &[Row], p: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows.len(), p);
    for (i, row) in rows.iter().enumerate() {
        for &(j, c) in row {
            m[(i, j)] += c;
        }
    }
    m
}

fn vstack(blocks: &[DMatrix<f64>], p: usize) -> DMatrix<f64> {
    let total = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = DMatrix::zeros(total, p);
    let mut at = 0;
    for b in blocks {
        m.rows_mut(at, b.nrows()).copy_from(b);
        at += b.nrows();
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use lcgqr::simulate::selector_rows;

    #[test]
    fn nonneg_expands_to_selector_rows() {
        let c = parse_constraints("nonneg = [5,6,11,12]\n", 20).unwrap();
        assert_eq!(c.ineq, selector_rows(20, &[5, 6, 11, 12]));
        assert_eq!(c.ineq_rhs, DVector::zeros(4));
        assert_eq!(c.eq.nrows(), 0);
        assert_eq!(c.eq_rhs.len(), 0);
        assert_eq!(c.penalty, DMatrix::identity(20, 20));
    }

    #[test]
    fn fused_lasso_sugar() {
        let c = parse_constraints("fused_lasso = true", 6).unwrap();
        assert_eq!(c.penalty, fused_lasso_matrix(6));
        assert_eq!(c.penalty.nrows(), 11);
        assert_eq!(c.penalty[(6, 0)], -1.0);
        assert_eq!(c.penalty[(6, 1)], 1.0);
    }

    #[test]
    fn sparse_equality_row_with_unicode_minus() {
        let c = parse_constraints("[\u{2212}3@5, 1@10, 1@12, 1@15] = \u{2212}1  # design row", 20).unwrap();
        assert_eq!(c.eq.nrows(), 1);
        let nz: Vec<(usize, f64)> = (0..20).filter(|&j| c.eq[(0, j)] != 0.0).map(|j| (j + 1, c.eq[(0, j)])).collect();
        assert_eq!(nz, vec![(5, -3.0), (10, 1.0), (12, 1.0), (15, 1.0)]);
        assert_eq!(c.eq_rhs[0], -1.0);
    }

    #[test]
    fn inequalities_in_both_directions() {
        let c = parse_constraints("[1@1, 2@2] >= 0.5\n[1@3] <= 2\n", 3).unwrap();
        assert_eq!(c.ineq, DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, 0.0, 0.0, -1.0]));
        assert_eq!(c.ineq_rhs.as_slice(), &[0.5, -2.0]);
    }

    #[test]
    fn penalty_rows_stack_under_fused() {
        let c = parse_constraints("fused_lasso = true\npenalty_row = [1@1, -1@3]\n", 3).unwrap();
        assert_eq!(c.penalty.nrows(), 6);
        assert_eq!(c.penalty.row(5).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.0, -1.0]);
        let only = parse_constraints("penalty_row = [2@2]", 3).unwrap();
        assert_eq!(only.penalty, DMatrix::from_row_slice(1, 3, &[0.0, 2.0, 0.0]));
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_constraints("lambda = 3", 5), Err(CliError::UnknownKey { line: 1, .. })));
        assert!(matches!(parse_constraints("p = 4", 5), Err(CliError::SpecDimensionMismatch(_))));
        assert!(matches!(parse_constraints("nonneg = [6]", 5), Err(CliError::SpecDimensionMismatch(_))));
        assert!(matches!(parse_constraints("# ok\n[1@2] => 1", 5), Err(CliError::SpecSyntax { line: 2, .. })));
        assert!(matches!(parse_constraints("[1x2] = 1", 5), Err(CliError::SpecSyntax { .. })));
        assert!(parse_constraints("p = 5\n\n", 5).is_ok());
    }
}
