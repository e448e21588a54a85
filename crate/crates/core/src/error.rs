use thiserror::Error;

use crate::chains::SearchBudget;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed text input. `pos` is a byte offset into the input.
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("value is not an element of {ring}: {detail}")]
    NotInRing { ring: String, detail: String },

    #[error("division by zero")]
    DivisionByZero,

    #[error("determinant is {det}, expected 1")]
    Determinant { det: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("ring {0} is not admissible for factorization (needs an inverted prime or a real quadratic field)")]
    NotAdmissible(String),

    #[error("search budget exhausted after {nodes} nodes (budget: {budget:?})")]
    BudgetExhausted { nodes: u64, budget: SearchBudget },

    #[error("no terminating division chain of length <= {max_k} found")]
    NotFound { max_k: usize },

    #[error("oracle table overflow: more than {limit} half-words")]
    OracleOverflow { limit: usize },

    #[error("malformed json: {0}")]
    Json(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse { pos, msg: msg.into() }
    }
}
