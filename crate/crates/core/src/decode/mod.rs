//! SC and SCL decoding with optional successive permutation.
//!
//! [`Decoder`] bundles a code with its per-node permutation eligibility so
//! repeated decoding avoids recomputing it; the free functions mirror the
//! one-shot call shape. SC and SPSC run a recursive depth-first traversal;
//! SCL and SPSCL run an iterative leaf-by-leaf engine so paths can fork at
//! information bits. With a list size of one the two produce bit-identical
//! results.

mod kernels;
mod list;
mod sc;
mod sp;

pub use kernels::{f_exact, f_minsum, g, pm_penalty_exact, pm_penalty_hard};
pub use sp::{shift_objective, sp_select};

use serde::{Deserialize, Serialize};

use crate::channel::LlrFrame;
use crate::code::CodeSpec;
use crate::permute::SpEligibility;
use crate::{Bit, Error, Result};

/// Which form of the boxplus kernel to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FKernel {
    Exact,
    MinSum,
}

/// Path-metric update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PmUpdate {
    /// `ln(1 + e^{-(1-2u)alpha})`.
    Exact,
    /// `|alpha|` on sign disagreement, zero otherwise.
    Hard,
}

/// Candidate set offered to the permutation selector; restricting to the
/// identity degrades SP decoding to the plain decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpCandidates {
    AllRotations,
    IdentityOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeOptions {
    pub f: FKernel,
    pub pm: PmUpdate,
    pub sp_candidates: SpCandidates,
    /// Record per-node shift choices in the result (diagnostic dumps).
    pub record_shifts: bool,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        Self {
            f: FKernel::MinSum,
            pm: PmUpdate::Exact,
            sp_candidates: SpCandidates::AllRotations,
            record_shifts: false,
        }
    }
}

/// A shift chosen at one node of the decoding tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeShift {
    pub layer: u32,
    pub node: usize,
    pub shift: u32,
}

/// Decoder output. `u_hat` is reported in original index order regardless
/// of any permutations applied during decoding, and `x_hat` is its
/// re-encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub u_hat: Vec<Bit>,
    pub x_hat: Vec<Bit>,
    pub metric: f64,
    /// Shift choices of the winning path (empty unless requested).
    pub chosen_shifts: Vec<NodeShift>,
    /// Final metrics of all surviving paths, ascending.
    pub survivor_metrics: Vec<f64>,
}

impl DecodeResult {
    /// Line-oriented diagnostic dump: one line per chosen shift, one per
    /// surviving path metric.
    pub fn diagnostic_dump(&self) -> String {
        let mut s = String::new();
        for ns in &self.chosen_shifts {
            s.push_str(&format!(
                "shift layer={} node={} s={}\n",
                ns.layer, ns.node, ns.shift
            ));
        }
        for pm in &self.survivor_metrics {
            s.push_str(&format!("pm {pm:.6}\n"));
        }
        s.push_str(&format!("best {:.6}\n", self.metric));
        s
    }
}

/// A code plus everything derived from it that decoding reuses.
pub struct Decoder<'a> {
    code: &'a CodeSpec,
    eligibility: SpEligibility,
    opts: DecodeOptions,
}

impl<'a> Decoder<'a> {
    pub fn new(code: &'a CodeSpec, opts: DecodeOptions) -> Self {
        Self {
            code,
            eligibility: SpEligibility::for_code(code),
            opts,
        }
    }

    pub fn code(&self) -> &CodeSpec {
        self.code
    }

    pub fn eligibility(&self) -> &SpEligibility {
        &self.eligibility
    }

    fn check_frame(&self, frame: &LlrFrame) -> Result<()> {
        if frame.len() != self.code.block_len() {
            return Err(Error::LengthMismatch {
                expected: self.code.block_len(),
                got: frame.len(),
            });
        }
        Ok(())
    }

    /// Successive cancellation.
    pub fn sc(&self, frame: &LlrFrame) -> Result<DecodeResult> {
        self.check_frame(frame)?;
        Ok(sc::run(self.code, &self.eligibility, frame, self.opts, false))
    }

    /// SC with successive permutation at eligible nodes.
    pub fn spsc(&self, frame: &LlrFrame) -> Result<DecodeResult> {
        self.check_frame(frame)?;
        Ok(sc::run(self.code, &self.eligibility, frame, self.opts, true))
    }

    /// SC list decoding with `list_size` surviving paths.
    pub fn scl(&self, frame: &LlrFrame, list_size: usize) -> Result<DecodeResult> {
        self.check_frame(frame)?;
        check_list(list_size)?;
        Ok(list::run(
            self.code,
            &self.eligibility,
            frame,
            list_size,
            self.opts,
            false,
        ))
    }

    /// SCL with per-path successive permutation.
    pub fn spscl(&self, frame: &LlrFrame, list_size: usize) -> Result<DecodeResult> {
        self.check_frame(frame)?;
        check_list(list_size)?;
        Ok(list::run(
            self.code,
            &self.eligibility,
            frame,
            list_size,
            self.opts,
            true,
        ))
    }
}

fn check_list(list_size: usize) -> Result<()> {
    if list_size == 0 {
        return Err(Error::InvalidConfig {
            what: "list size",
            detail: "must be at least 1".into(),
        });
    }
    Ok(())
}

pub fn decode_sc(code: &CodeSpec, frame: &LlrFrame, opts: DecodeOptions) -> Result<DecodeResult> {
    Decoder::new(code, opts).sc(frame)
}

pub fn decode_spsc(code: &CodeSpec, frame: &LlrFrame, opts: DecodeOptions) -> Result<DecodeResult> {
    Decoder::new(code, opts).spsc(frame)
}

pub fn decode_scl(
    code: &CodeSpec,
    frame: &LlrFrame,
    list_size: usize,
    opts: DecodeOptions,
) -> Result<DecodeResult> {
    Decoder::new(code, opts).scl(frame, list_size)
}

pub fn decode_spscl(
    code: &CodeSpec,
    frame: &LlrFrame,
    list_size: usize,
    opts: DecodeOptions,
) -> Result<DecodeResult> {
    Decoder::new(code, opts).spscl(frame, list_size)
}

#[inline]
pub(crate) fn apply_f(f: FKernel, a: f64, b: f64) -> f64 {
    match f {
        FKernel::Exact => f_exact(a, b),
        FKernel::MinSum => f_minsum(a, b),
    }
}

#[inline]
pub(crate) fn leaf_penalty(pm: PmUpdate, alpha: f64, bit: Bit) -> f64 {
    match pm {
        PmUpdate::Exact => pm_penalty_exact(alpha, bit),
        PmUpdate::Hard => pm_penalty_hard(alpha, bit),
    }
}
