use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid ring: {0}")]
    InvalidSpec(String),

    #[error("full-space too large: {n_sites} sites exceeds the limit of {limit}")]
    FullSpaceTooLarge { n_sites: usize, limit: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("invalid time grid: {0}")]
    InvalidTimes(String),

    #[error("site {site} out of range for a ring of {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("empty one-magnon sector (in-sector weight {weight:e})")]
    EmptySector { weight: f64 },

    #[error("schedule does not commute at all times; use the stepped integrator")]
    NonCommutingSchedule,

    #[error("step size {dt} too large; must be positive and at most {max}")]
    InvalidStep { dt: f64, max: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("eigenstate index {index} out of range ({count} states in sector)")]
    InvalidEigenIndex { index: usize, count: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
