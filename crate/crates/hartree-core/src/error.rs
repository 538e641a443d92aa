use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field does not belong to this grid")]
    GridMismatch,
    #[error("non-finite sample at node {0}")]
    NonFinite(usize),
    #[error("zero field: {0}")]
    ZeroField(&'static str),
    #[error("kernel evaluated on the diagonal r = s = {0}")]
    KernelDiagonal(f64),
    #[error("rescaled field leaves the grid: tail mass fraction {0:.3e}")]
    TailMass(f64),
    #[error("ground-state solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64, trace: Vec<(usize, f64)> },
    #[error("ground-state iteration collapsed to the zero field")]
    Collapse,
    #[error("time t = {t} is not before the blow-up time {t_star}")]
    PastBlowup { t: f64, t_star: f64 },
    #[error("blow-up fit rejected: {0}")]
    FitRejected(String),
    #[error("integration unstable: {0}")]
    Unstable(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
