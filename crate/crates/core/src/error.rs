use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("assembled spectral measure has negative mass {mass:.3e} at atom {atom}")]
    NegativeMeasure { atom: usize, mass: f64 },

    #[error("characteristic function has a pole: denominator {0:.3e}")]
    Pole(f64),

    #[error("empty sample")]
    EmptySample,

    #[error("samples are not sorted")]
    Unsorted,

    #[error("degenerate test: {0}")]
    Degenerate(String),

    #[error("pmf truncation mass {mass:.3e} exceeds tolerance {tol:.3e}")]
    Truncation { mass: f64, tol: f64 },

    #[error("time {0} is not a grid point")]
    OffGrid(f64),

    #[error("invalid spectral family: {0}")]
    Spectral(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
