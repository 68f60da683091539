use thiserror::Error;

/// Errors raised by operators, solvers and the file formats.
///
/// Numerical failures of a solve (singular systems, non-convergence) are
/// not errors; they are reported through [`crate::SolveResult`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A vector or operator did not match the expected tree structure.
    #[error("structure mismatch: {0}")]
    Structure(String),

    /// A solver was paired with an operator it cannot handle.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A user-supplied function failed or produced an invalid value.
    #[error("evaluation failed: {0}")]
    Evaluation(String),

    /// Malformed input file.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Well-formed input that does not describe a valid vector or operator.
    #[error("invalid input: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
