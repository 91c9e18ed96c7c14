//! Error type shared by every module of the crate.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// A grid, window or channel parameter is outside its valid range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two operands have incompatible shapes.
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    /// The number of bits does not fill the available data cells.
    #[error("bit count mismatch: expected {expected} bits, got {got}")]
    BitCountMismatch { expected: usize, got: usize },

    /// Dense oracle builders refuse frames larger than the oracle bound.
    #[error("oracle size {size} exceeds the bound of {max} (dense oracles are for small frames)")]
    OracleTooLarge { size: usize, max: usize },

    /// The requested extra Doppler guard does not fit in the frame.
    #[error("infeasible guard: k_hat = {k_hat} exceeds the maximum of {max}")]
    InfeasibleGuard { k_hat: usize, max: i64 },

    /// The delay guard band would wrap around the frame without the override flag.
    #[error("delay guard band of {band} bins does not fit in M = {m} without wraparound")]
    DelayBandWrap { band: usize, m: usize },

    /// The requested sidelobe level cannot be reached at this window length.
    #[error("sidelobe level {requested_db} dB not achievable; best achievable is {achievable_db:.2} dB")]
    InfeasibleSidelobe { requested_db: f64, achievable_db: f64 },

    /// Every eigen-channel gain is zero, so no power allocation is useful.
    #[error("no usable eigen-channel: all channel gains are zero")]
    NoUsableChannel,

    /// A quantity that must be non-negative was negative.
    #[error("negative input: {0}")]
    NegativeInput(String),

    /// The window pair is not normalized as the requested analysis requires.
    #[error("window not normalized: sum |VU|^2 = {power}, expected {expected}")]
    UnnormalizedWindow { power: f64, expected: f64 },

    /// A linear system could not be solved.
    #[error("singular system: {0}")]
    Singular(String),

    /// The SPA detector would exceed its configured compute budget.
    #[error("SPA factor size Q^L = {required} exceeds the compute budget of {budget}")]
    SpaBudget { required: u128, budget: u128 },

    /// Experiment configuration is malformed.
    #[error("config error: {0}")]
    Config(String),

    /// A numerical self-check failed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn shape(expected: impl std::fmt::Display, got: impl std::fmt::Display) -> Self {
        Error::ShapeMismatch {
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }
}
