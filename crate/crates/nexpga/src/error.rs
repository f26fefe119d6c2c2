use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("line search failed: inner iteration cap {cap} exceeded at outer iteration {k} (gamma reached {gamma:.3e}); this indicates a broken oracle, since the acceptance criterion must hold after finitely many inner steps")]
    LineSearchFailed { k: usize, cap: usize, gamma: f64 },

    #[error("solver invariant violated at iteration {k}: {what}")]
    InvariantViolation { k: usize, what: String },

    #[error("power iteration did not converge within {0} iterations")]
    PowerIterationDiverged(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error("empty iterate series")]
    EmptySeries,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
