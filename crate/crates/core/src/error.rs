use thiserror::Error;

use crate::instance::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error, line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid instance: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidInstance(Vec<Violation>),

    #[error("infeasible parameters: {m} clauses need {} slots but n={n} variables with at most {} occurrences each offer {}", 3 * .m, .d_bound + 1, .n * (.d_bound + 1))]
    Infeasible { n: usize, m: usize, d_bound: usize },

    #[error("random instance generation gave up after {attempts} attempts")]
    RetryBudgetExhausted { attempts: usize },

    #[error("assignment has length {got}, instance has {expected} variables")]
    AssignmentLength { expected: usize, got: usize },

    #[error("{n} qubits exceeds the limit of {max}")]
    TooManyQubits { n: usize, max: usize },

    #[error("state has {state} qubits but the instance needs {instance}")]
    DimensionMismatch { state: usize, instance: usize },

    #[error("neighborhood support of {q} bits exceeds the enumeration cap of {max}")]
    SupportTooLarge { q: usize, max: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 2 for bad input or infeasible requests, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Json(_) => 1,
            _ => 2,
        }
    }
}
