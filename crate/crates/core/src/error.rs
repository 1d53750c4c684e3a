use std::path::PathBuf;

use thiserror::Error;

use crate::state::FieldSnapshot;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("missing required key `{0}`")]
    MissingKey(String),

    #[error("dimension mismatch: expected {expected} values, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("{quantity} = {value} is outside the valid range [{min}, {max}]")]
    OutOfRange {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("equation of state: {0}")]
    Eos(String),

    #[error("singular pivot in row {row}")]
    SingularMatrix { row: usize },

    #[error("all-zero Jacobian row {row} (cell {cell}, {equation} equation)")]
    ZeroRow {
        row: usize,
        cell: usize,
        equation: &'static str,
    },

    #[error("assembly failed in cell {cell}: {source}")]
    Assembly {
        cell: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("Newton iteration did not converge in {iterations} iterations (residual {residual:.3e})")]
    NewtonDiverged {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },

    #[error("mechanical setup: {0}")]
    MechanicalSetup(String),

    #[error("step rejected: {0}")]
    StepRejected(String),

    #[error("run aborted at t = {time} s: {reason}")]
    RunAborted {
        time: f64,
        reason: String,
        snapshot: Box<FieldSnapshot>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line driver: 1 for configuration
    /// and I/O problems, 2 for solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Parse { .. }
            | Error::MissingKey(_)
            | Error::Dimension { .. }
            | Error::Io { .. }
            | Error::MechanicalSetup(_) => 1,
            _ => 2,
        }
    }

    /// True when a smaller time step may cure the failure.
    pub fn is_recoverable(&self) -> bool {
        matches!(
            self,
            Error::NewtonDiverged { .. }
                | Error::StepRejected(_)
                | Error::Eos(_)
                | Error::Assembly { .. }
                | Error::SingularMatrix { .. }
                | Error::ZeroRow { .. }
                | Error::OutOfRange { .. }
        )
    }
}
