use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("constraint violation: {what} = {value:e} exceeds tolerance {tol:e}")]
    ConstraintViolation { what: String, value: f64, tol: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {what} at step {step}")]
    NonFinite { what: String, step: usize },

    #[error("CFL guard tripped: {cfl:.3} > {limit:.3}")]
    CflViolation { cfl: f64, limit: f64 },

    #[error("energy density floor violated: min h = {min_h:e} < {floor:e}")]
    FloorViolation { min_h: f64, floor: f64 },

    #[error("ensemble member {index} failed: {source}")]
    Member {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn constraint(what: impl Into<String>, value: f64, tol: f64) -> Self {
        Error::ConstraintViolation {
            what: what.into(),
            value,
            tol,
        }
    }

    /// True for errors caused by the numerics (blow-up, CFL, floor), as opposed
    /// to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NonFinite { .. } | Error::CflViolation { .. } | Error::FloorViolation { .. } => {
                true
            }
            Error::Member { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
