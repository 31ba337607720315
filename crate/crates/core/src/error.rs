use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("matrix is not antisymmetric at ({i}, {j}): |a_ij + a_ji| = {violation:e}")]
    NotAntisymmetric { i: usize, j: usize, violation: f64 },

    #[error("index {index} out of range for {len} players")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid labels: {0}")]
    Labels(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("probabilities at ({i}, {j}) are not complementary: p_ij = {p_ij}, p_ji = {p_ji}")]
    NonComplementary { i: usize, j: usize, p_ij: f64, p_ji: f64 },

    #[error("distribution is not on the simplex: {0}")]
    OffSimplex(String),

    #[error("comparison graph is disconnected")]
    Disconnected,

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("problem too large for brute force: n = {n}, limit {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }

    /// True for errors that come from an iterative solver rather than bad input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::NonConvergence { .. } | Error::Solver(_) | Error::NonFinite(_))
    }
}
