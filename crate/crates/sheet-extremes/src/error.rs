//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Hurst index out of range: ({0}, {1}) not in (0,1)^2")]
    InvalidHurst(f64, f64),

    #[error("invalid point ({0}, {1}): coordinates must be finite and non-negative")]
    InvalidPoint(f64, f64),

    #[error("invalid rectangle: {0}")]
    InvalidRect(String),

    #[error("invalid parameter {name}: {msg}")]
    InvalidParam { name: &'static str, msg: String },

    #[error("grid index ({0}, {1}) out of range for {2}x{3} sample")]
    IndexOutOfRange(usize, usize, usize, usize),

    #[error("domain not supported for this operation: {0}")]
    UnsupportedDomain(String),

    #[error("bound family {family} is not applicable to domain {domain}")]
    FamilyDomainMismatch { family: String, domain: String },

    #[error("quadrature failed to converge: {0}")]
    QuadratureFailed(String),

    #[error("series does not converge: {0}")]
    SeriesDiverges(String),

    #[error("series terms do not decay within the probe budget: {0}")]
    SeriesNonDecay(String),

    #[error("covariance factorization failed: {0}")]
    FactorizationFailed(String),

    #[error("grid too large: {0} points exceeds the configured maximum {1}")]
    GridTooLarge(usize, usize),

    #[error(
        "normalizer must be strictly positive on the grid (found {0} at grid point ({1}, {2}))"
    )]
    NormalizerNotPositive(f64, f64, f64),
}

pub type Result<T> = std::result::Result<T, Error>;
