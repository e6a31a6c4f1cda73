use thiserror::Error;

pub type Result<T> = std::result::Result<T, QetError>;

#[derive(Debug, Error)]
pub enum QetError {
    /// Input rejected before any computation ran.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A numerical routine failed to meet its contract.
    #[error("numeric failure: {0}")]
    NumericFailure(String),

    /// An iterative search ran out of budget. Carries the best point seen.
    #[error("iteration budget of {iterations} exhausted (best value {best_value})")]
    BudgetExhausted {
        iterations: usize,
        best_value: f64,
        best_point: Vec<f64>,
    },

    /// A measurement branch has zero probability and cannot be normalised.
    #[error("measurement branch mu={mu} has zero probability")]
    DegenerateBranch { mu: u8 },

    /// Classical-channel handshake or framing error.
    #[error("protocol error: {0}")]
    Protocol(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl QetError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        QetError::InvalidInput(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        QetError::NumericFailure(msg.into())
    }

    /// Process exit code used by the CLI: 2 for usage/validation, 3 for
    /// numeric failures, 1 for I/O and protocol errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            QetError::InvalidInput(_) => 2,
            QetError::NumericFailure(_)
            | QetError::BudgetExhausted { .. }
            | QetError::DegenerateBranch { .. } => 3,
            QetError::Protocol(_) | QetError::Io(_) => 1,
        }
    }
}
