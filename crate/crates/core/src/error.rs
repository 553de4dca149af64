use thiserror::Error;

/// Errors produced by the raftmin core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field format error: {0}")]
    FieldFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("energy diverged below {floor:e} (eps = {eps}, q = {q}, last energy {energy:e})")]
    Diverged { eps: f64, q: f64, energy: f64, floor: f64 },

    #[error("step size underflow at step {step}: dt = {dt:e}")]
    StepUnderflow { step: usize, dt: f64 },

    #[error("functional unbounded below: {0}")]
    UnboundedBelow(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("geometry error: {0}")]
    Geometry(String),
}

pub type Result<T> = std::result::Result<T, Error>;
