use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A finite-time flow left the disc. The exit happened in `(t_lo, t_hi]`.
    #[error("geodesic left the domain between t = {t_lo} and t = {t_hi}")]
    ExitedDomain { t_lo: f64, t_hi: f64 },
    #[error("geodesic did not exit within {steps} steps")]
    TrapBudgetExceeded { steps: usize },
    #[error("point ({x}, {y}) lies outside the domain")]
    OutsideDomain { x: f64, y: f64 },
    #[error("iterative solver diverged after {iterations} iterations (residual {residual:e})")]
    SolverDiverged { iterations: usize, residual: f64 },
    #[error("iteration cap {iterations} reached with relative residual {residual:e}")]
    MaxIterations { iterations: usize, residual: f64 },
    #[error("Neumann series stalled at term {term}: increment ratio {ratio:.3} is not below one")]
    NeumannDiverged { term: usize, ratio: f64 },
    #[error("backend mismatch: {0}")]
    BackendMismatch(String),
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("config hash mismatch: expected {expected}, found {found}")]
    HashMismatch { expected: String, found: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
