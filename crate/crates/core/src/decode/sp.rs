//! On-the-fly selection of the cyclic shift that maximizes the reliability
//! of a node's f outputs.

use crate::decode::kernels::{f_exact, f_minsum};
use crate::decode::{FKernel, SpCandidates};
use crate::permute::CyclicShift;

/// Pick the candidate rotation of `alpha` (a node vector of length `2^m`)
/// that maximizes `sum_i |f(alpha[p(i)], alpha[p(i + 2^(m-1))])|`.
///
/// Returns the identity when the node is ineligible or has a single
/// candidate; ties break toward the identity, then the smaller shift. The
/// chosen shift never scores below the identity.
pub fn sp_select(
    alpha: &[f64],
    eligible: bool,
    candidates: SpCandidates,
    f: FKernel,
) -> CyclicShift {
    debug_assert!(alpha.len().is_power_of_two());
    let m = alpha.len().trailing_zeros();
    debug_assert!(m >= 1);
    if !eligible || candidates == SpCandidates::IdentityOnly || m < 2 {
        return CyclicShift::identity(m);
    }
    let identity_score = shift_objective(alpha, CyclicShift::identity(m), f);
    let mut best = CyclicShift::identity(m);
    let mut best_score = identity_score;
    for s in 1..m {
        let cand = CyclicShift::new(m, s);
        let score = shift_objective(alpha, cand, f);
        if score > best_score {
            best_score = score;
            best = cand;
        }
    }
    debug_assert!(best_score >= identity_score);
    best
}

/// Reliability of the f outputs under a candidate rotation.
pub fn shift_objective(alpha: &[f64], shift: CyclicShift, f: FKernel) -> f64 {
    let half = alpha.len() / 2;
    let mut total = 0.0;
    match f {
        FKernel::MinSum => {
            for i in 0..half {
                let a = alpha[shift.map_index(i)];
                let b = alpha[shift.map_index(i + half)];
                total += f_minsum(a, b).abs();
            }
        }
        FKernel::Exact => {
            for i in 0..half {
                let a = alpha[shift.map_index(i)];
                let b = alpha[shift.map_index(i + half)];
                total += f_exact(a, b).abs();
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_magnitudes_tie_to_identity() {
        let alpha = [2.0, -2.0, 2.0, 2.0, -2.0, 2.0, -2.0, -2.0];
        let shift = sp_select(&alpha, true, SpCandidates::AllRotations, FKernel::MinSum);
        assert!(shift.is_identity());
    }

    #[test]
    fn pairing_strong_with_strong_wins() {
        // Identity pairs (4,1) and (3,1) for a score of 2; the bit swap
        // pairs (4,3) and (1,1) for 4.
        let alpha = [4.0, 3.0, 1.0, 1.0];
        let shift = sp_select(&alpha, true, SpCandidates::AllRotations, FKernel::MinSum);
        assert_eq!(shift, CyclicShift::new(2, 1));
        assert_eq!(
            shift_objective(&alpha, shift, FKernel::MinSum),
            4.0
        );
        assert_eq!(
            shift_objective(&alpha, CyclicShift::identity(2), FKernel::MinSum),
            2.0
        );
    }

    #[test]
    fn ineligible_or_identity_only_returns_identity() {
        let alpha = [4.0, 3.0, 1.0, 1.0];
        assert!(sp_select(&alpha, false, SpCandidates::AllRotations, FKernel::MinSum).is_identity());
        assert!(sp_select(&alpha, true, SpCandidates::IdentityOnly, FKernel::MinSum).is_identity());
    }

    #[test]
    fn two_leaf_nodes_have_no_alternative() {
        let alpha = [0.5, -8.0];
        assert!(sp_select(&alpha, true, SpCandidates::AllRotations, FKernel::MinSum).is_identity());
    }
}
