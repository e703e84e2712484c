//! Dense helpers shared by the solvers: a cached SPD factorization and a few
//! vector utilities.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Pivot ratio below which a Cholesky factor is treated as numerically singular.
const SINGULAR_PIVOT_RATIO: f64 = 1e-13;
/// Diagonal jitter, relative to the largest diagonal entry, added on singularity.
pub const JITTER: f64 = 1e-10;

/// Cholesky factorization of a symmetric positive (semi)definite matrix that is
/// factored once and reused for every right-hand side.
#[derive(Clone, Debug)]
pub struct SpdFactor {
    chol: Cholesky<f64, Dyn>,
    matrix: DMatrix<f64>,
    jitter: f64,
}

impl SpdFactor {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n != matrix.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "normal matrix is {}x{}",
                n,
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEntry("normal matrix".into()));
        }
        let max_diag = matrix.diagonal().iter().fold(0.0_f64, |a, &b| a.max(b));
        if n > 0 && max_diag <= 0.0 {
            return Err(Error::SingularNormalMatrix);
        }
        if let Some(chol) = well_conditioned(&matrix, max_diag) {
            return Ok(Self { chol, matrix, jitter: 0.0 });
        }
        let jitter = JITTER * max_diag.max(1.0);
        let mut shifted = matrix.clone();
        for i in 0..n {
            shifted[(i, i)] += jitter;
        }
        match well_conditioned(&shifted, max_diag) {
            Some(chol) => Ok(Self { chol, matrix: shifted, jitter }),
            None => Err(Error::SingularNormalMatrix),
        }
    }

    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(rhs)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// The matrix actually factored (including jitter, if any was added).
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Solve with a fresh LU factorization of the stored matrix, for checking
    /// that the cached factor has not drifted.
    pub fn fresh_solve(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        self.matrix.clone().lu().solve(rhs)
    }
}

fn well_conditioned(matrix: &DMatrix<f64>, max_diag: f64) -> Option<Cholesky<f64, Dyn>> {
    let chol = Cholesky::new(matrix.clone())?;
    let l = chol.l_dirty();
    let min_pivot = (0..l.nrows())
        .map(|i| l[(i, i)] * l[(i, i)])
        .fold(f64::INFINITY, f64::min);
    if l.nrows() == 0 || min_pivot > SINGULAR_PIVOT_RATIO * max_diag.max(f64::MIN_POSITIVE) {
        Some(chol)
    } else {
        None
    }
}

/// Pairwise (cascade) summation in index order. Deterministic for a given slice.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

pub fn norm1(v: &DVector<f64>) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn norm_inf(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |a, &b| a.max(b.abs()))
}

/// Stack matrices with equal column counts vertically. Empty (0-row) blocks are fine.
pub fn vstack(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let cols = blocks.first().map(|b| b.ncols()).unwrap_or(0);
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut offset = 0;
    for b in blocks {
        debug_assert_eq!(b.ncols(), cols);
        out.rows_mut(offset, b.nrows()).copy_from(*b);
        offset += b.nrows();
    }
    out
}

/// `AᵀA` without forming the transpose explicitly.
pub fn gram(a: &DMatrix<f64>) -> DMatrix<f64> {
    a.tr_mul(a)
}

/// Median of absolute values; 0 for an empty vector.
pub fn median_abs(v: &DVector<f64>) -> f64 {
    let mut xs: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}
