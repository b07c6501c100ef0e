use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size mismatch: expected {expected}, got {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("site {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("duplicate site {0} in selection")]
    DuplicateSite(usize),

    #[error("invalid bit string {0:?}")]
    InvalidBits(String),

    #[error("sector with {ones} set bits does not exist for {n_sites} sites")]
    InvalidSector { ones: usize, n_sites: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state is not normalized (norm {0:.3e})")]
    NotNormalized(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("system too large for the dense path: {n_sites} sites (limit {limit})")]
    TooLarge { n_sites: usize, limit: usize },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("trace drifted to {trace:.12} at t = {t}")]
    TraceDrift { t: f64, trace: f64 },

    #[error("negative eigenvalue {value:.3e} at t = {t}")]
    Negativity { t: f64, value: f64 },

    #[error("no interior maximum in series {0:?}")]
    NoPeak(String),

    #[error("unknown series channel {0:?}")]
    UnknownChannel(String),
}
