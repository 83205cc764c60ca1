use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The supplied (L, gamma, mu) leave no admissible step parameter.
    #[error("parameter regime: {0}")]
    ParameterRegime(String),

    /// A maintained invariant failed at run time. This usually means the
    /// constants handed to the method do not hold for the objective.
    #[error("invariant violation at k = {k}: {what}")]
    InvariantViolation { k: usize, what: String, state: String },

    #[error("unstable closed loop: {0}")]
    Instability(String),

    #[error("Riccati iteration did not converge after {0} iterations")]
    NotStabilizable(usize),

    #[error("diverged at k = {k}: f went from {from} to {to}")]
    Diverged { k: usize, from: f64, to: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
