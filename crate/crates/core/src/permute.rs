//! Factor-graph permutation machinery.
//!
//! A node spanning `2^m` leaves admits the `m` cyclic rotations of its local
//! index bits (rotation 0 is the identity). Rotations preserve Hamming
//! weight, so applying one at a node whose frozen pattern depends only on
//! local index weight leaves the pattern intact — which is why successive
//! permutation is unrestricted on Reed-Muller codes and limited to the
//! Reed-Muller sub-codes of polar codes.

use num_bigint::BigUint;

use crate::code::CodeSpec;
use crate::{Error, Result};

/// One cyclic rotation of the `layer_bits` index bits of a node's local
/// indices. `shift = 0` is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CyclicShift {
    layer_bits: u32,
    shift: u32,
}

impl CyclicShift {
    pub fn new(layer_bits: u32, shift: u32) -> Self {
        assert!(layer_bits >= 1, "a shiftable node spans at least 2 leaves");
        assert!(shift < layer_bits, "shift must lie in [0, layer_bits)");
        Self { layer_bits, shift }
    }

    pub fn identity(layer_bits: u32) -> Self {
        Self::new(layer_bits, 0)
    }

    pub fn layer_bits(&self) -> u32 {
        self.layer_bits
    }

    pub fn shift(&self) -> u32 {
        self.shift
    }

    pub fn is_identity(&self) -> bool {
        self.shift == 0
    }

    /// Number of leaves the node spans.
    pub fn span(&self) -> usize {
        1usize << self.layer_bits
    }

    /// The inverse rotation: shifts compose modulo `layer_bits`.
    pub fn inverse(&self) -> Self {
        let s = if self.shift == 0 {
            0
        } else {
            self.layer_bits - self.shift
        };
        Self::new(self.layer_bits, s)
    }

    /// Rotate the binary expansion of a local index left by `shift`
    /// positions within `layer_bits` bits.
    #[inline]
    pub fn map_index(&self, i: usize) -> usize {
        if self.shift == 0 {
            return i;
        }
        let m = self.layer_bits;
        let mask = (1usize << m) - 1;
        ((i << self.shift) | (i >> (m - self.shift))) & mask
    }
}

/// Permute a node-sized vector: `out[i] = v[map_index(i)]`.
pub fn apply_shift<T: Copy>(v: &[T], shift: CyclicShift) -> Result<Vec<T>> {
    if v.len() != shift.span() {
        return Err(Error::LengthMismatch {
            expected: shift.span(),
            got: v.len(),
        });
    }
    Ok((0..v.len()).map(|i| v[shift.map_index(i)]).collect())
}

/// In-place variant used by the decoders; `scratch` is reused storage.
pub(crate) fn apply_shift_in_place<T: Copy>(v: &mut [T], shift: CyclicShift, scratch: &mut Vec<T>) {
    debug_assert_eq!(v.len(), shift.span());
    if shift.is_identity() {
        return;
    }
    scratch.clear();
    scratch.extend_from_slice(v);
    for (i, slot) in v.iter_mut().enumerate() {
        *slot = scratch[shift.map_index(i)];
    }
}

/// Total number of per-node cyclic-shift assignments over the whole decoding
/// tree of a length-`2^n` code: `prod_{l=0}^{n-1} (n-l)^(2^l)`.
pub fn count_permutations(n: u32) -> BigUint {
    let mut total = BigUint::from(1u32);
    for l in 0..n {
        total *= BigUint::from(n - l).pow(1u32 << l);
    }
    total
}

/// Per-path permutation state: the shift in force at each layer of the
/// current root-to-leaf traversal, plus the composite map from decode-order
/// position to original bit index.
#[derive(Debug, Clone, PartialEq)]
pub struct PermState {
    active: Vec<u32>,
    leaf_map: Vec<u32>,
}

impl PermState {
    pub fn identity(n: u32) -> Self {
        Self {
            active: vec![0; n as usize + 1],
            leaf_map: (0..1u32 << n).collect(),
        }
    }

    /// Map from decode-order position to original bit index.
    pub fn leaf_map(&self) -> &[u32] {
        &self.leaf_map
    }

    pub fn is_identity(&self) -> bool {
        self.leaf_map.iter().enumerate().all(|(i, &m)| i as u32 == m)
    }

    pub(crate) fn active_shift(&self, layer: u32) -> u32 {
        self.active[layer as usize]
    }

    pub(crate) fn set_active_shift(&mut self, layer: u32, shift: u32) {
        self.active[layer as usize] = shift;
    }

    pub(crate) fn original_index(&self, decode_pos: usize) -> usize {
        self.leaf_map[decode_pos] as usize
    }

    /// Compose a node-local shift over the node's decode span.
    pub(crate) fn permute_span(&mut self, base: usize, shift: CyclicShift, scratch: &mut Vec<u32>) {
        let span = &mut self.leaf_map[base..base + shift.span()];
        apply_shift_in_place(span, shift, scratch);
    }
}

/// Per-node successive-permutation eligibility over the decoding tree.
///
/// A node at layer `m`, offset `t` is eligible when, within its `2^m` leaf
/// span, frozen membership depends only on the Hamming weight of the local
/// index. Rate-0 and rate-1 nodes are trivially eligible; for Reed-Muller
/// codes every node is.
#[derive(Debug, Clone)]
pub struct SpEligibility {
    levels: Vec<Vec<bool>>,
}

impl SpEligibility {
    pub fn for_code(code: &CodeSpec) -> Self {
        let n = code.n();
        let mask = code.frozen_mask();
        let levels = (0..=n)
            .map(|m| {
                let span = 1usize << m;
                (0..code.block_len() >> m)
                    .map(|t| weight_class_complete(&mask[t * span..(t + 1) * span]))
                    .collect()
            })
            .collect();
        Self { levels }
    }

    #[inline]
    pub fn is_eligible(&self, layer: u32, node: usize) -> bool {
        self.levels[layer as usize][node]
    }

    pub fn all_eligible(&self) -> bool {
        self.levels.iter().flatten().all(|&e| e)
    }
}

/// Free-function form of [`SpEligibility::for_code`].
pub fn sp_eligibility(code: &CodeSpec) -> SpEligibility {
    SpEligibility::for_code(code)
}

/// Whether a local frozen pattern is constant on every Hamming-weight class
/// of its index range.
pub fn weight_class_complete(pattern: &[bool]) -> bool {
    debug_assert!(pattern.len().is_power_of_two());
    let m = pattern.len().trailing_zeros();
    let mut class_value = [None::<bool>; 33];
    for (j, &frozen) in pattern.iter().enumerate() {
        let w = j.count_ones() as usize;
        match class_value[w] {
            None => class_value[w] = Some(frozen),
            Some(v) if v != frozen => return false,
            _ => {}
        }
    }
    let _ = m;
    true
}
