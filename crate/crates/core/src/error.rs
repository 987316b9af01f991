use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown integrand `{0}`")]
    UnknownIntegrand(String),
    #[error("{entry}: {constraint}")]
    InvalidParameter { entry: String, constraint: String },
    #[error("cannot parse `{input}` at byte {pos}: {msg}")]
    Parse {
        input: String,
        pos: usize,
        msg: String,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("singular point: {0}")]
    Singular(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("non-convexity: Q(xi, lambda) = {value:e} at xi = {xi:?}, lambda = {lambda:?}")]
    NonConvex {
        xi: Vec<f64>,
        lambda: Vec<f64>,
        value: f64,
    },
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("solver: {0}")]
    Solver(String),
    #[error("empty region: {0}")]
    EmptyRegion(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(entry: &str, constraint: impl Into<String>) -> Error {
    Error::InvalidParameter {
        entry: entry.to_string(),
        constraint: constraint.into(),
    }
}
