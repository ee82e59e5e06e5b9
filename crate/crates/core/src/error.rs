use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {what}")]
    NonFinite { what: String },

    #[error("point is infeasible: distance to the set is {distance:e} (tolerance {tolerance:e})")]
    Infeasible { distance: f64, tolerance: f64 },

    #[error("invalid feasible set: {0}")]
    InvalidSet(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("unknown problem `{name}`; registered problems: {}", available.join(", "))]
    UnknownProblem { name: String, available: Vec<String> },

    #[error("unknown builtin operator `{0}`")]
    UnknownOperator(String),

    #[error("solver diverged at iteration {k}: {reason}")]
    Diverged {
        k: usize,
        reason: String,
        last_valid: Vec<f64>,
    },

    #[error(
        "inner subproblem at outer iteration {k} did not reach tolerance {tolerance:e} \
         within {iters} iterations (residual {residual:e})"
    )]
    InnerSolver {
        k: usize,
        iters: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("no candidate solutions available: {0}")]
    NoCandidates(String),

    #[error("trajectory was produced by {found}, but {expected} is required")]
    KindMismatch { expected: String, found: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
