use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry in {0}")]
    NonFiniteEntry(String),

    #[error("quantile level tau = {0} must lie strictly inside (0, 1)")]
    TauOutOfRange(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The penalty prox objective is nonconvex for this (xi, gamma) pair.
    #[error("concavity xi = {xi} too strong for gamma = {gamma}: need xi > {bound}")]
    ConcavityTooLarge { xi: f64, gamma: f64, bound: f64 },

    #[error("normal matrix is singular and could not be regularized")]
    SingularNormalMatrix,

    #[error("polyhedron projection did not converge (KKT residual {kkt_residual:.3e})")]
    ProjectionNotConverged { kkt_residual: f64 },

    #[error("constraint polyhedron is empty (infeasibility certificate found)")]
    InfeasiblePolyhedron,

    #[error("no block partition satisfies the orthogonality condition")]
    InvalidPartition,

    #[error("maximum iterations ({0}) exceeded")]
    MaxItersExceeded(usize),

    #[error("penalty {0} is not supported by this solver")]
    UnsupportedPenalty(String),

    #[error("cannot split {n} observations into {parts} partitions")]
    TooManyPartitions { n: usize, parts: usize },

    #[error("check loss is zero; HBIC is undefined (perfect fit)")]
    DegenerateLoss,

    #[error("tuning grid is invalid: {0}")]
    InvalidGrid(String),

    #[error("solvers did not reach matched objective accuracy (relative gap {gap:.3e})")]
    MatchedAccuracyUnreachable { gap: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
