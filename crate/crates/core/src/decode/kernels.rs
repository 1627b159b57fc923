//! LLR update kernels and path-metric penalties.

use crate::Bit;

/// Exact boxplus `2 atanh(tanh(a/2) tanh(b/2))`, evaluated through the
/// sign-magnitude log-domain identity
/// `min(|a|,|b|) + ln(1+e^{-(|a|+|b|)}) - ln(1+e^{-||a|-|b||})`
/// so it stays finite for arguments far beyond tanh saturation.
#[inline]
pub fn f_exact(a: f64, b: f64) -> f64 {
    let aa = a.abs();
    let ab = b.abs();
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    let mag = aa.min(ab) + (-(aa + ab)).exp().ln_1p() - (-(aa - ab).abs()).exp().ln_1p();
    sign * mag
}

/// Min-sum approximation `sgn(a) sgn(b) min(|a|, |b|)`.
#[inline]
pub fn f_minsum(a: f64, b: f64) -> f64 {
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    sign * a.abs().min(b.abs())
}

/// Partial-sum update `g(a, b, s) = b + (1 - 2s) a`.
#[inline]
pub fn g(a: f64, b: f64, s: Bit) -> f64 {
    if s == 0 {
        b + a
    } else {
        b - a
    }
}

/// `ln(1 + e^{-t})`, overflow-free on both sides.
#[inline]
pub(crate) fn softplus_neg(t: f64) -> f64 {
    if t >= 0.0 {
        (-t).exp().ln_1p()
    } else {
        -t + t.exp().ln_1p()
    }
}

/// Exact path-metric penalty `ln(1 + e^{-(1-2u)alpha})` for deciding `bit`
/// against LLR `alpha`. Always non-negative.
#[inline]
pub fn pm_penalty_exact(alpha: f64, bit: Bit) -> f64 {
    let t = if bit == 0 { alpha } else { -alpha };
    softplus_neg(t)
}

/// Hard approximation of the penalty: `|alpha|` when the decision opposes
/// the LLR sign, zero otherwise.
#[inline]
pub fn pm_penalty_hard(alpha: f64, bit: Bit) -> f64 {
    let agrees = (alpha >= 0.0) == (bit == 0);
    if agrees {
        0.0
    } else {
        alpha.abs()
    }
}
