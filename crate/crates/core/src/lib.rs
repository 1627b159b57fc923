//! Polar and Reed-Muller channel codes with successive-cancellation (SC),
//! SC list (SCL), and successive-permutation (SPSC, SPSCL) decoding.
//!
//! The crate is organized around the transmit/receive chain:
//!
//! * [`code`] — code construction (polar via Gaussian-approximation density
//!   evolution, Reed-Muller via row weights), Kronecker-transform encoding,
//!   and CRC attachment.
//! * [`channel`] — BPSK modulation, AWGN noise, and LLR demodulation.
//! * [`permute`] — cyclic-shift factor-graph permutations: candidate sets,
//!   permutation counting, and the per-node eligibility map that restricts
//!   successive permutation to Reed-Muller sub-codes.
//! * [`decode`] — the four decoders and their LLR kernels.
//! * [`sim`] — a deterministic Monte Carlo frame-error-rate harness with
//!   early stopping and an ML-lower-bound mode.
//!
//! Decoding is deterministic: a given `(code, frame, options)` triple always
//! produces the same output, and the simulator derives one RNG per frame so
//! results do not depend on the worker count.

pub mod channel;
pub mod code;
pub mod decode;
pub mod permute;
pub mod sim;

mod error;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Bits are plain bytes restricted to `{0, 1}`.
pub type Bit = u8;
