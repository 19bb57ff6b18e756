use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coin vector is not normalized (|c|^2 = {norm})")]
    CoinNotNormalized { norm: f64 },

    #[error(
        "unknown coin input `{0}` (expected L, S, R, sigma_plus, sigma_minus_1 or sigma_minus_2)"
    )]
    UnknownCoin(String),

    #[error("norm drifted to {norm} at t = {t}; evolution aborted")]
    NormDrift { t: u64, norm: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("series too short: {0}")]
    SeriesTooShort(String),

    #[error("power-law fit failed: {0}")]
    Fit(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
