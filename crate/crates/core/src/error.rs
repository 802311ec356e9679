use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: operands live on different radial grids")]
    GridMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("annulus [{inner}, {outer}] exceeds grid radius {r_max}")]
    AnnulusOutsideGrid { inner: f64, outer: f64, r_max: f64 },

    #[error("linear system is singular at pivot {0}")]
    Singular(usize),

    #[error("negativity unreachable for annulus {index}: Rayleigh value {rayleigh:.3e} at lambda {lambda:.3e}; {diagnostic}")]
    NegativityUnreachable {
        index: usize,
        lambda: f64,
        rayleigh: f64,
        diagnostic: String,
    },

    #[error("empty subspace family")]
    EmptyFamily,
}

pub type Result<T> = std::result::Result<T, Error>;
