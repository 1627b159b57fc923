//! Iterative list decoding engine.
//!
//! The factor-graph traversal is flattened into `N` leaf phases so that all
//! paths advance in lockstep and can fork at information bits. Each path
//! owns per-layer LLR and partial-sum workspaces (O(N) reals plus O(N) bits)
//! together with its permutation state; forking clones the whole path.
//!
//! Layer `l` of the workspace holds the `2^l` values of the node currently
//! being traversed at that depth. The root LLR vector is shared by all
//! paths: it is only ever permuted once, before the first fork, when the
//! root node is entered.

use crate::channel::LlrFrame;
use crate::code::CodeSpec;
use crate::decode::sp::sp_select;
use crate::decode::{
    apply_f, g, leaf_penalty, DecodeOptions, DecodeResult, NodeShift,
};
use crate::permute::{apply_shift_in_place, CyclicShift, PermState, SpEligibility};
use crate::Bit;

#[derive(Clone)]
struct PathState {
    /// Layers 0..n, layer `l` at offset `2^l` (slot 0 unused).
    alpha: Vec<f64>,
    /// Layers 1..=n, layer `l` at offset `2^l`.
    beta: Vec<Bit>,
    perm: PermState,
    decisions: Vec<Bit>,
    metric: f64,
    chosen: Vec<NodeShift>,
}

#[inline]
fn layer_slice(l: u32) -> std::ops::Range<usize> {
    let off = 1usize << l;
    off..2 * off
}

struct Engine<'a> {
    code: &'a CodeSpec,
    eligibility: &'a SpEligibility,
    opts: DecodeOptions,
    sp: bool,
    n: u32,
    root_alpha: Vec<f64>,
    scratch_f: Vec<f64>,
    scratch_b: Vec<Bit>,
    scratch_u: Vec<u32>,
}

pub(super) fn run(
    code: &CodeSpec,
    eligibility: &SpEligibility,
    frame: &LlrFrame,
    list_size: usize,
    opts: DecodeOptions,
    sp: bool,
) -> DecodeResult {
    let n = code.n();
    let block_len = code.block_len();
    let mut engine = Engine {
        code,
        eligibility,
        opts,
        sp,
        n,
        root_alpha: frame.as_slice().to_vec(),
        scratch_f: Vec::with_capacity(block_len),
        scratch_b: vec![0; block_len],
        scratch_u: Vec::with_capacity(block_len),
    };

    let mut initial = PathState {
        alpha: vec![0.0; block_len],
        beta: vec![0; 2 * block_len],
        perm: PermState::identity(n),
        decisions: vec![0; block_len],
        metric: 0.0,
        chosen: Vec::new(),
    };

    // The root node is entered exactly once, before any fork, so its shift
    // is common to every path.
    if sp {
        let eligible = eligibility.is_eligible(n, 0);
        let shift = sp_select(&engine.root_alpha, eligible, opts.sp_candidates, opts.f);
        if !shift.is_identity() {
            apply_shift_in_place(&mut engine.root_alpha, shift, &mut engine.scratch_f);
            initial.perm.permute_span(0, shift, &mut engine.scratch_u);
        }
        initial.perm.set_active_shift(n, shift.shift());
        if eligible && opts.record_shifts {
            initial.chosen.push(NodeShift {
                layer: n,
                node: 0,
                shift: shift.shift(),
            });
        }
    }

    let mut paths = vec![initial];
    for phase in 0..block_len {
        for path in &mut paths {
            engine.calc_alpha(path, phase);
        }
        let frozen = engine.code.is_frozen(paths[0].perm.original_index(phase));
        debug_assert!(paths
            .iter()
            .all(|p| engine.code.is_frozen(p.perm.original_index(phase)) == frozen));

        if frozen {
            for path in &mut paths {
                let a = path.alpha[layer_slice(0)][0];
                let pm = path.metric + leaf_penalty(engine.opts.pm, a, 0);
                debug_assert!(pm >= path.metric);
                path.metric = pm;
                path.decisions[phase] = 0;
                engine.propagate_beta(path, phase, 0);
            }
        } else {
            paths = engine.fork_and_prune(paths, phase, list_size);
        }
    }

    finish(&engine, paths)
}

fn finish(engine: &Engine, mut paths: Vec<PathState>) -> DecodeResult {
    let code = engine.code;
    let block_len = code.block_len();
    let mut order: Vec<usize> = (0..paths.len()).collect();
    order.sort_by(|&a, &b| {
        paths[a]
            .metric
            .total_cmp(&paths[b].metric)
            .then(a.cmp(&b))
    });
    let survivor_metrics: Vec<f64> = order.iter().map(|&i| paths[i].metric).collect();

    let build_u = |p: &PathState| {
        let mut u = vec![0; block_len];
        for (pos, &bit) in p.decisions.iter().enumerate() {
            u[p.perm.original_index(pos)] = bit;
        }
        u
    };

    let mut winner = order[0];
    let mut u_hat = build_u(&paths[winner]);
    if code.crc().is_some() {
        // Smallest-metric path that passes the CRC; fall back to the best
        // metric overall when none do.
        let mut found = None;
        for &idx in &order {
            let u = build_u(&paths[idx]);
            let message: Vec<Bit> = code.info_positions().iter().map(|&i| u[i]).collect();
            if code.check_crc(&message).expect("code has a CRC") {
                found = Some((idx, u));
                break;
            }
        }
        if let Some((idx, u)) = found {
            winner = idx;
            u_hat = u;
        }
    }

    let x_hat = code.encode(&u_hat).expect("decoder output must re-encode");
    let best = paths.swap_remove(winner);
    DecodeResult {
        u_hat,
        x_hat,
        metric: best.metric,
        chosen_shifts: best.chosen,
        survivor_metrics,
    }
}

impl Engine<'_> {
    /// Compute the leaf LLR for `phase`, entering every node whose first
    /// leaf this is. Entry order is fixed by the traversal: one g update at
    /// the layer above the deepest completed subtree, then f updates down
    /// to the leaf, with permutation selection at each newly entered node.
    fn calc_alpha(&mut self, path: &mut PathState, phase: usize) {
        let top = if phase == 0 {
            self.n
        } else {
            phase.trailing_zeros()
        };
        if phase != 0 {
            let z = top;
            let half = 1usize << z;
            let (parent, child) = if z + 1 == self.n {
                (&self.root_alpha[..], &mut path.alpha[layer_slice(z)])
            } else {
                let (lo, hi) = path.alpha.split_at_mut(1usize << (z + 1));
                (&hi[..1usize << (z + 1)], &mut lo[1usize << z..])
            };
            let left_beta = &path.beta[layer_slice(z + 1)][..half];
            for i in 0..half {
                child[i] = g(parent[i], parent[i + half], left_beta[i]);
            }
        }
        for l in (1..=top).rev() {
            if l < self.n {
                self.enter_node(path, l, phase);
            }
            let half = 1usize << (l - 1);
            if l == self.n {
                for i in 0..half {
                    let v = apply_f(self.opts.f, self.root_alpha[i], self.root_alpha[i + half]);
                    path.alpha[(1 << (l - 1)) + i] = v;
                }
            } else {
                let (lo, hi) = path.alpha.split_at_mut(1usize << l);
                let src = &hi[..1usize << l];
                for i in 0..half {
                    lo[(1 << (l - 1)) + i] = apply_f(self.opts.f, src[i], src[i + half]);
                }
            }
        }
    }

    /// Run permutation selection on first entry to the node at `layer`
    /// whose span starts at `phase`.
    fn enter_node(&mut self, path: &mut PathState, layer: u32, phase: usize) {
        if !self.sp {
            return;
        }
        let node = phase >> layer;
        let eligible = self.eligibility.is_eligible(layer, node);
        let alpha = &mut path.alpha[layer_slice(layer)];
        let shift = sp_select(alpha, eligible, self.opts.sp_candidates, self.opts.f);
        if !shift.is_identity() {
            apply_shift_in_place(alpha, shift, &mut self.scratch_f);
            path.perm.permute_span(phase, shift, &mut self.scratch_u);
        }
        path.perm.set_active_shift(layer, shift.shift());
        if eligible && layer >= 2 && self.opts.record_shifts {
            path.chosen.push(NodeShift {
                layer,
                node,
                shift: shift.shift(),
            });
        }
    }

    /// Feed a decided bit back up: combine completed right children into
    /// their parents, undoing each parent's shift on exit, and park the
    /// result as the left half of the first unfinished ancestor.
    fn propagate_beta(&mut self, path: &mut PathState, phase: usize, bit: Bit) {
        self.scratch_b[0] = bit;
        let mut l = 0u32;
        while (phase >> l) & 1 == 1 {
            let half = 1usize << l;
            let parent = &mut path.beta[layer_slice(l + 1)];
            for i in 0..half {
                let nb = self.scratch_b[i];
                parent[i] ^= nb;
                parent[i + half] = nb;
            }
            let shift = path.perm.active_shift(l + 1);
            if shift != 0 {
                let inv = CyclicShift::new(l + 1, shift).inverse();
                for j in 0..2 * half {
                    self.scratch_b[j] = parent[inv.map_index(j)];
                }
            } else {
                self.scratch_b[..2 * half].copy_from_slice(parent);
            }
            l += 1;
        }
        if l < self.n {
            let half = 1usize << l;
            path.beta[layer_slice(l + 1)][..half].copy_from_slice(&self.scratch_b[..half]);
        }
    }

    /// Duplicate every path on both bit hypotheses and keep the `list_size`
    /// smallest metrics; ties break by parent index then bit value.
    fn fork_and_prune(
        &mut self,
        paths: Vec<PathState>,
        phase: usize,
        list_size: usize,
    ) -> Vec<PathState> {
        let mut candidates: Vec<(f64, usize, Bit)> = Vec::with_capacity(2 * paths.len());
        for (idx, path) in paths.iter().enumerate() {
            let a = path.alpha[layer_slice(0)][0];
            candidates.push((path.metric + leaf_penalty(self.opts.pm, a, 0), idx, 0));
            candidates.push((path.metric + leaf_penalty(self.opts.pm, a, 1), idx, 1));
        }
        candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        candidates.truncate(list_size);

        let mut uses = vec![0u8; paths.len()];
        for &(_, idx, _) in &candidates {
            uses[idx] += 1;
        }
        let mut pool: Vec<Option<PathState>> = paths.into_iter().map(Some).collect();
        let mut out = Vec::with_capacity(candidates.len());
        for &(pm, idx, bit) in &candidates {
            let mut path = if uses[idx] > 1 {
                uses[idx] -= 1;
                pool[idx].as_ref().expect("parent still pooled").clone()
            } else {
                pool[idx].take().expect("parent still pooled")
            };
            debug_assert!(pm >= path.metric);
            path.metric = pm;
            path.decisions[phase] = bit;
            self.propagate_beta(&mut path, phase, bit);
            out.push(path);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{modulate, transmit, ChannelParams};
    use crate::code::CrcSpec;
    use crate::decode::Decoder;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_frame(n: u32, rng: &mut ChaCha8Rng) -> LlrFrame {
        let alpha: Vec<f64> = (0..1usize << n).map(|_| rng.random_range(-8.0..8.0)).collect();
        LlrFrame::new(alpha).unwrap()
    }

    #[test]
    fn list_of_one_matches_sc_bitwise() {
        let code = CodeSpec::reed_muller(5, 16).unwrap();
        let dec = Decoder::new(&code, DecodeOptions::default());
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..300 {
            let frame = random_frame(5, &mut rng);
            let sc = dec.sc(&frame).unwrap();
            let scl = dec.scl(&frame, 1).unwrap();
            assert_eq!(sc.u_hat, scl.u_hat);
            assert_eq!(sc.metric.to_bits(), scl.metric.to_bits());

            let spsc = dec.spsc(&frame).unwrap();
            let spscl = dec.spscl(&frame, 1).unwrap();
            assert_eq!(spsc.u_hat, spscl.u_hat);
            assert_eq!(spsc.metric.to_bits(), spscl.metric.to_bits());
        }
    }

    #[test]
    fn reported_metric_is_the_best_survivor() {
        let code = CodeSpec::polar(5, 16, 2.0).unwrap();
        let dec = Decoder::new(&code, DecodeOptions::default());
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let frame = random_frame(5, &mut rng);
            for l in [1, 4, 16] {
                let res = dec.scl(&frame, l).unwrap();
                assert_eq!(res.survivor_metrics.len(), l);
                assert_eq!(res.metric.to_bits(), res.survivor_metrics[0].to_bits());
                assert!(res.metric >= 0.0);
            }
        }
    }

    #[test]
    fn survivors_are_sorted_and_frozen_respected() {
        let code = CodeSpec::reed_muller(4, 11).unwrap();
        let dec = Decoder::new(&code, DecodeOptions::default());
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..100 {
            let frame = random_frame(4, &mut rng);
            for res in [
                dec.scl(&frame, 4).unwrap(),
                dec.spscl(&frame, 4).unwrap(),
            ] {
                assert!(res
                    .survivor_metrics
                    .windows(2)
                    .all(|w| w[0] <= w[1]));
                assert_eq!(res.survivor_metrics.len(), 4);
                for p in code.frozen_positions() {
                    assert_eq!(res.u_hat[p], 0);
                }
                assert_eq!(res.x_hat, code.encode(&res.u_hat).unwrap());
            }
        }
    }

    #[test]
    fn crc_selection_prefers_passing_path() {
        let code = CodeSpec::polar(5, 20, 3.0)
            .unwrap()
            .with_crc(CrcSpec::crc11())
            .unwrap();
        let dec = Decoder::new(&code, DecodeOptions::default());
        let params = ChannelParams::new(4.0, code.rate(), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut crc_hits = 0;
        for _ in 0..200 {
            let payload: Vec<Bit> = (0..code.payload_len()).map(|_| rng.random_range(0..2)).collect();
            let message = code.attach_crc(&payload).unwrap();
            let mut u = vec![0; code.block_len()];
            for (&pos, &bit) in code.info_positions().iter().zip(message.iter()) {
                u[pos] = bit;
            }
            let x = code.encode(&u).unwrap();
            let frame = transmit(&modulate(&x), &params, &mut rng);
            let res = dec.scl(&frame, 8).unwrap();
            let got: Vec<Bit> = code.info_positions().iter().map(|&i| res.u_hat[i]).collect();
            if code.check_crc(&got).unwrap() {
                crc_hits += 1;
            }
        }
        // At this SNR nearly every frame decodes to a CRC-passing path.
        assert!(crc_hits > 150, "only {crc_hits} CRC-passing frames");
    }
}
