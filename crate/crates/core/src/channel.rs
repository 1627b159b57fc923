//! BPSK modulation, AWGN noise, and LLR demodulation.
//!
//! Bit 0 maps to +1.0 and bit 1 to -1.0, so a positive LLR favours bit 0.
//! The receiver scales by `2/sigma^2`, turning samples into exact channel
//! LLRs for the decoders.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Bit, Error, Result};

/// AWGN channel operating point.
///
/// `sigma^2 = 1 / (2 * rate * 10^(ebn0_db/10))`, i.e. Eb/N0 is measured per
/// information bit at the given code rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub ebn0_db: f64,
    pub rate: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl ChannelParams {
    pub fn new(ebn0_db: f64, rate: f64, seed: u64) -> Self {
        assert!(rate > 0.0 && rate <= 1.0, "rate must be in (0, 1]");
        let sigma_sq = 1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0));
        Self {
            ebn0_db,
            rate,
            sigma: sigma_sq.sqrt(),
            seed,
        }
    }

    pub fn sigma_sq(&self) -> f64 {
        self.sigma * self.sigma
    }

    /// LLR scaling factor `2/sigma^2`.
    pub fn llr_scale(&self) -> f64 {
        2.0 / self.sigma_sq()
    }
}

/// A block of channel log-likelihood ratios, all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrFrame {
    alpha: Vec<f64>,
}

impl LlrFrame {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if let Some(pos) = alpha.iter().position(|a| !a.is_finite()) {
            return Err(Error::InvalidConfig {
                what: "LLR frame",
                detail: format!("non-finite value at index {pos}"),
            });
        }
        Ok(Self { alpha })
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.alpha
    }

    /// One value per line, prefixed by a length header; float formatting
    /// round-trips exactly.
    pub fn to_fixture_string(&self) -> String {
        let mut s = format!("llr {}\n", self.alpha.len());
        for a in &self.alpha {
            s.push_str(&format!("{a:?}\n"));
        }
        s
    }

    pub fn from_fixture_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::FixtureParse("empty LLR fixture".into()))?;
        let count: usize = header
            .strip_prefix("llr ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::FixtureParse(format!("bad LLR header {header:?}")))?;
        let mut alpha = Vec::with_capacity(count);
        for line in lines {
            let v: f64 = line
                .trim()
                .parse()
                .map_err(|_| Error::FixtureParse(format!("bad LLR value {line:?}")))?;
            alpha.push(v);
        }
        if alpha.len() != count {
            return Err(Error::FixtureParse(format!(
                "expected {count} values, got {}",
                alpha.len()
            )));
        }
        LlrFrame::new(alpha)
    }
}

/// BPSK map: bit 0 -> +1.0, bit 1 -> -1.0.
pub fn modulate(x: &[Bit]) -> Vec<f64> {
    x.iter().map(|&b| 1.0 - 2.0 * f64::from(b)).collect()
}

/// Add white Gaussian noise and demodulate to LLRs: `alpha = (2/sigma^2) y`
/// with `y = s + n`, `n ~ N(0, sigma^2)`.
pub fn transmit<R: Rng>(s: &[f64], params: &ChannelParams, rng: &mut R) -> LlrFrame {
    let scale = params.llr_scale();
    let alpha = s
        .iter()
        .map(|&sym| {
            let noise: f64 = rng.sample(StandardNormal);
            scale * (sym + params.sigma * noise)
        })
        .collect();
    LlrFrame { alpha }
}
