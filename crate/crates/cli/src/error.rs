use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    /// The command finished but the solver stopped at its iteration cap.
    pub const NOT_CONVERGED: u8 = 1;
    /// Bad flags or settings, unreadable CSV cells, malformed constraint spec.
    pub const INPUT: u8 = 2;
    /// The solver failed numerically or the polyhedron is empty.
    pub const SOLVER: u8 = 3;
    pub const IO: u8 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}: line {line}, column {column}: {message}", path.display())]
    Parse { path: PathBuf, line: u64, column: usize, message: String },

    #[error("{}: no data rows", .0.display())]
    EmptyFile(PathBuf),

    #[error("constraint spec line {line}: {message}")]
    SpecSyntax { line: usize, message: String },

    #[error("constraint spec line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("constraint spec does not fit the data: {0}")]
    SpecDimensionMismatch(String),

    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Solver(#[from] lcgqr::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Io { .. } => exit::IO,
            Self::Solver(e) => match e {
                // Settings the user can fix on the command line or in the data.
                lcgqr::Error::DimensionMismatch(_)
                | lcgqr::Error::NonFiniteEntry(_)
                | lcgqr::Error::TauOutOfRange(_)
                | lcgqr::Error::InvalidConfig(_)
                | lcgqr::Error::ConcavityTooLarge { .. }
                | lcgqr::Error::UnsupportedPenalty(_)
                | lcgqr::Error::TooManyPartitions { .. }
                | lcgqr::Error::InvalidGrid(_) => exit::INPUT,
                _ => exit::SOLVER,
            },
            _ => exit::INPUT,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_by_class() {
        assert_eq!(CliError::EmptyFile("a.csv".into()).exit_code(), exit::INPUT);
        assert_eq!(CliError::UnknownKey { line: 1, key: "x".into() }.exit_code(), exit::INPUT);
        assert_eq!(CliError::Solver(lcgqr::Error::DegenerateLoss).exit_code(), exit::SOLVER);
        assert_eq!(CliError::Solver(lcgqr::Error::TauOutOfRange(1.5)).exit_code(), exit::INPUT);
        let io = std::io::Error::new(std::io::ErrorKind::NotFound, "gone");
        assert_eq!(CliError::io("a.csv", io).exit_code(), exit::IO);
    }
}
