use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("block length exponent n must satisfy 1 <= n <= 30, got {0}")]
    InvalidBlockExponent(u32),

    #[error("dimension K = {k} is out of range for block length N = {block_len}")]
    DimensionOutOfRange { k: usize, block_len: usize },

    #[error(
        "K = {k} does not select whole Hamming-weight classes for n = {n}; \
         nearest achievable dimensions are {below} and {above}"
    )]
    RmDimension {
        n: u32,
        k: usize,
        below: usize,
        above: usize,
    },

    #[error("expected length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("frozen position {0} carries a nonzero bit")]
    FrozenBitSet(usize),

    #[error("bit at position {0} is not 0 or 1")]
    NonBinary(usize),

    #[error("code carries no CRC")]
    MissingCrc,

    #[error("invalid CRC parameters: {0}")]
    InvalidCrc(String),

    #[error("ML lower bound requires a list decoder (SCL or SPSCL)")]
    MlBoundNeedsList,

    #[error("invalid {what}: {detail}")]
    InvalidConfig { what: &'static str, detail: String },

    #[error("fixture parse error: {0}")]
    FixtureParse(String),
}
