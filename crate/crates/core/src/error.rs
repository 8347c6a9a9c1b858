use thiserror::Error;

pub type Result<T> = std::result::Result<T, AbwError>;

#[derive(Debug, Error)]
pub enum AbwError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid market: {0}")]
    InvalidMarket(String),

    /// Rejected because the pricing weight would not be non-increasing (Γ ≤ R).
    #[error("benchmark growth {gamma} does not exceed total rate {total_rate}; pricing weight is not decreasing")]
    NonDecreasingPricingWeight { gamma: f64, total_rate: f64 },

    #[error("grid mismatch: expected {expected} nodes, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    InvalidConfig(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
