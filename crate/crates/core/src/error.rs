use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain is not star-shaped: min ρ = {min_rho:e} at θ = {theta}")]
    NonStarShaped { min_rho: f64, theta: f64 },

    #[error("degenerate triangle {index} (area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("potentials are not ordered pointwise (V1 > V2 at node {0})")]
    NotOrdered(usize),

    #[error("exponent q = {q} exceeds the Kohler-Jobin range q <= {max}")]
    ExponentOutOfRange { q: f64, max: f64 },

    #[error("precondition violated: {0}")]
    DomainError(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
