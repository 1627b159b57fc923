//! Recursive successive-cancellation traversal, with optional successive
//! permutation at eligible nodes.
//!
//! On entering a node the selected shift is applied physically to the node's
//! LLR vector and composed into the leaf map; the partial sums are permuted
//! back on exit, so the f/g kernels never see the permutation. Decisions are
//! therefore made in decode order and scattered through the leaf map at the
//! end.

use crate::channel::LlrFrame;
use crate::code::CodeSpec;
use crate::decode::sp::sp_select;
use crate::decode::{
    apply_f, leaf_penalty, DecodeOptions, DecodeResult, NodeShift,
};
use crate::permute::{apply_shift_in_place, PermState, SpEligibility};
use crate::Bit;

struct Traversal<'a> {
    code: &'a CodeSpec,
    eligibility: &'a SpEligibility,
    opts: DecodeOptions,
    sp: bool,
    perm: PermState,
    decisions: Vec<Bit>,
    metric: f64,
    pos: usize,
    chosen: Vec<NodeShift>,
    scratch_f: Vec<f64>,
    scratch_u: Vec<u32>,
}

pub(super) fn run(
    code: &CodeSpec,
    eligibility: &SpEligibility,
    frame: &LlrFrame,
    opts: DecodeOptions,
    sp: bool,
) -> DecodeResult {
    let block_len = code.block_len();
    let mut t = Traversal {
        code,
        eligibility,
        opts,
        sp,
        perm: PermState::identity(code.n()),
        decisions: vec![0; block_len],
        metric: 0.0,
        pos: 0,
        chosen: Vec::new(),
        scratch_f: Vec::with_capacity(block_len),
        scratch_u: Vec::with_capacity(block_len),
    };
    let mut alpha = frame.as_slice().to_vec();
    t.node(&mut alpha, code.n());
    debug_assert_eq!(t.pos, block_len);

    let mut u_hat = vec![0; block_len];
    for (pos, &bit) in t.decisions.iter().enumerate() {
        u_hat[t.perm.original_index(pos)] = bit;
    }
    let x_hat = code.encode(&u_hat).expect("decoder output must re-encode");
    DecodeResult {
        u_hat,
        x_hat,
        metric: t.metric,
        chosen_shifts: t.chosen,
        survivor_metrics: vec![t.metric],
    }
}

impl Traversal<'_> {
    fn node(&mut self, alpha: &mut Vec<f64>, layer: u32) -> Vec<Bit> {
        if layer == 0 {
            let original = self.perm.original_index(self.pos);
            debug_assert_eq!(
                self.code.is_frozen(original),
                self.code.is_frozen(self.pos),
                "permutation moved a frozen bit onto an information slot"
            );
            let a = alpha[0];
            let bit = if self.code.is_frozen(original) {
                0
            } else if a >= 0.0 {
                0
            } else {
                1
            };
            self.metric += leaf_penalty(self.opts.pm, a, bit);
            self.decisions[self.pos] = bit;
            self.pos += 1;
            return vec![bit];
        }

        let shift = if self.sp {
            let eligible = self.eligibility.is_eligible(layer, self.pos >> layer);
            let shift = sp_select(alpha, eligible, self.opts.sp_candidates, self.opts.f);
            if !shift.is_identity() {
                apply_shift_in_place(alpha, shift, &mut self.scratch_f);
                self.perm.permute_span(self.pos, shift, &mut self.scratch_u);
            }
            if eligible && layer >= 2 && self.opts.record_shifts {
                self.chosen.push(NodeShift {
                    layer,
                    node: self.pos >> layer,
                    shift: shift.shift(),
                });
            }
            shift
        } else {
            crate::permute::CyclicShift::identity(layer)
        };

        let half = 1usize << (layer - 1);
        let mut child: Vec<f64> = (0..half)
            .map(|i| apply_f(self.opts.f, alpha[i], alpha[i + half]))
            .collect();
        let beta_left = self.node(&mut child, layer - 1);

        for i in 0..half {
            child[i] = crate::decode::g(alpha[i], alpha[i + half], beta_left[i]);
        }
        let beta_right = self.node(&mut child, layer - 1);

        let mut beta = vec![0; 2 * half];
        for i in 0..half {
            beta[i] = beta_left[i] ^ beta_right[i];
            beta[i + half] = beta_right[i];
        }
        if !shift.is_identity() {
            let mut scratch = Vec::new();
            apply_shift_in_place(&mut beta, shift.inverse(), &mut scratch);
        }
        beta
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{modulate, transmit, ChannelParams, LlrFrame};
    use crate::code::CodeFamily;
    use crate::decode::{Decoder, SpCandidates};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noiseless_frame(code: &CodeSpec, u: &[Bit], seed: u64) -> LlrFrame {
        let x = code.encode(u).unwrap();
        let params = ChannelParams::new(60.0, code.rate(), seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        transmit(&modulate(&x), &params, &mut rng)
    }

    #[test]
    fn two_leaf_hand_trace() {
        // frozen = {0}; alpha = (-1, -3): the frozen leaf decides 0, then
        // g(-1, -3, 0) = -4 forces bit 1.
        let code = CodeSpec::from_frozen(CodeFamily::Polar, 1, &[0]).unwrap();
        let frame = LlrFrame::new(vec![-1.0, -3.0]).unwrap();
        let res = Decoder::new(&code, DecodeOptions::default())
            .sc(&frame)
            .unwrap();
        assert_eq!(res.u_hat, vec![0, 1]);
        assert_eq!(res.x_hat, code.encode(&res.u_hat).unwrap());
    }

    #[test]
    fn noiseless_frames_decode_exactly() {
        let code = CodeSpec::reed_muller(5, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let dec = Decoder::new(&code, DecodeOptions::default());
        for trial in 0..50 {
            let mut u = vec![0; code.block_len()];
            for &i in code.info_positions() {
                u[i] = rng.random_range(0..2);
            }
            let frame = noiseless_frame(&code, &u, trial);
            for res in [dec.sc(&frame).unwrap(), dec.spsc(&frame).unwrap()] {
                assert_eq!(res.u_hat, u);
                assert_eq!(res.x_hat, code.encode(&u).unwrap());
            }
        }
    }

    #[test]
    fn spsc_with_identity_candidates_equals_sc() {
        let code = CodeSpec::reed_muller(4, 11).unwrap();
        let opts_id = DecodeOptions {
            sp_candidates: SpCandidates::IdentityOnly,
            ..DecodeOptions::default()
        };
        let sc = Decoder::new(&code, DecodeOptions::default());
        let sp_id = Decoder::new(&code, opts_id);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let alpha: Vec<f64> = (0..16).map(|_| rng.random_range(-6.0..6.0)).collect();
            let frame = LlrFrame::new(alpha).unwrap();
            let a = sc.sc(&frame).unwrap();
            let b = sp_id.spsc(&frame).unwrap();
            assert_eq!(a.u_hat, b.u_hat);
            assert_eq!(a.metric.to_bits(), b.metric.to_bits());
        }
    }

    #[test]
    fn spsc_leaf_map_is_identity_without_sp() {
        // Covered structurally: SC never touches the leaf map. Exercise a
        // frame and confirm frozen positions still hold zeros.
        let code = CodeSpec::polar(4, 8, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let dec = Decoder::new(&code, DecodeOptions::default());
        for _ in 0..100 {
            let alpha: Vec<f64> = (0..16).map(|_| rng.random_range(-8.0..8.0)).collect();
            let frame = LlrFrame::new(alpha).unwrap();
            for res in [dec.sc(&frame).unwrap(), dec.spsc(&frame).unwrap()] {
                for p in code.frozen_positions() {
                    assert_eq!(res.u_hat[p], 0);
                }
                assert_eq!(res.x_hat, code.encode(&res.u_hat).unwrap());
                assert!(res.metric >= 0.0);
            }
        }
    }

    #[test]
    fn recorded_shifts_cover_eligible_nodes() {
        let code = CodeSpec::reed_muller(3, 4).unwrap();
        let opts = DecodeOptions {
            record_shifts: true,
            ..DecodeOptions::default()
        };
        let frame = LlrFrame::new(vec![4.0, 3.0, 1.0, 1.0, -2.0, 5.0, -0.5, 2.5]).unwrap();
        let res = Decoder::new(&code, opts).spsc(&frame).unwrap();
        // Root (layer 3) plus two layer-2 nodes are selectable.
        assert_eq!(res.chosen_shifts.len(), 3);
        assert_eq!(res.chosen_shifts[0].layer, 3);
        let dump = res.diagnostic_dump();
        assert!(dump.starts_with("shift layer=3 node=0"));
        assert!(dump.contains("best "));
    }
}
