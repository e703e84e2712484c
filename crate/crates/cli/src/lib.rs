//! Command-line front end for the `lcgqr` solvers: CSV ingestion, constraint
//! specs, fitting, tuning, simulation and key-value reports.

pub mod app;
pub mod constraints;
pub mod data;
pub mod error;
pub mod report;

pub use app::{run, Cli};
pub use error::{exit, CliError};
