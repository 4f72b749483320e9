use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integer overflow computing {0}")]
    Overflow(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("cannot convert the zero vector to spherical coordinates")]
    ZeroVector,

    #[error("quadrature with {nodes} nodes cannot resolve degree {degree}")]
    QuadratureOrder { nodes: usize, degree: usize },

    #[error("truncation degree {needed} exceeds hard cap {cap} (rho = {rho}, tol = {tol:e})")]
    TruncationCap {
        needed: usize,
        cap: usize,
        rho: f64,
        tol: f64,
    },

    #[error("truncation degree {given} is below the {needed} required for tolerance {tol:e}")]
    Truncation { given: usize, needed: usize, tol: f64 },

    #[error("no real gamma vector of order {order} for lambda = {lambda}: {detail}")]
    NoRealSolution {
        order: usize,
        lambda: f64,
        detail: String,
    },

    #[error("gamma solver did not converge: {0}")]
    NonConvergence(String),

    #[error("gamma vector mismatch: {0}")]
    GammaMismatch(String),
}
