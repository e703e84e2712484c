//! Quantile regression with generalized lasso penalties and linear equality /
//! inequality constraints, solved by multi-block ADMM.

pub mod bench;
pub mod consensus;
pub mod error;
pub mod linalg;
pub mod multiblock;
pub mod problem;
pub mod prox;
pub mod report;
pub mod simulate;
pub mod solvers;
pub mod tuning;

pub use error::{Error, Result};
pub use problem::{PenaltyFamily, PenaltySpec, Problem, SolverConfig};
pub use report::SolveReport;
