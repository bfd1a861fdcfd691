use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("frequency tuple violates the signed-sum constraint (residual {0:e})")]
    ConstraintViolated(f64),
    #[error("s = {s} is below the validity range (s_min = {s_min})")]
    BelowValidityRange { s: f64, s_min: f64 },
    #[error("blow-up guard tripped at t = {time}")]
    BlowUp { time: f64 },
    #[error("non-finite value detected at t = {time}")]
    NonFinite { time: f64 },
    #[error("time {0} was not sampled by the trajectory")]
    TimeNotSampled(f64),
    #[error("fit window [{lo}, {hi}] holds {shells} shells, need at least {need}")]
    EmptyWindow { lo: f64, hi: f64, shells: usize, need: usize },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
