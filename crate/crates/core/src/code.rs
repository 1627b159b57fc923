//! Code construction, encoding, and CRC handling for polar and Reed-Muller
//! codes.
//!
//! Both families share the generator `G^{⊗n}` (the n-th Kronecker power of
//! `[[1,0],[1,1]]`) and differ only in which input positions carry
//! information. Reed-Muller codes take the rows of largest Hamming weight,
//! which constrains the dimension to partial binomial sums; polar codes take
//! the most reliable bit-channels under density evolution at a design SNR.

use serde::{Deserialize, Serialize};

use crate::{Bit, Error, Result};

/// Code family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeFamily {
    Polar,
    ReedMuller,
}

/// Bit-serial CRC parameters.
///
/// `polynomial` is the normal representation with the leading `x^width` term
/// implicit. The 11-bit CRC used for list decoding of polar codes is
/// [`CrcSpec::crc11`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrcSpec {
    pub width: u32,
    pub polynomial: u64,
    pub initial_value: u64,
    pub reflect: bool,
}

impl CrcSpec {
    /// CRC-11 with generator `x^11 + x^10 + x^9 + x^5 + 1` (0x621), zero
    /// initial value, no reflection.
    pub fn crc11() -> Self {
        Self {
            width: 11,
            polynomial: 0x621,
            initial_value: 0,
            reflect: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.width > 63 {
            return Err(Error::InvalidCrc(format!(
                "width {} outside 1..=63",
                self.width
            )));
        }
        if self.polynomial >> self.width != 0 {
            return Err(Error::InvalidCrc(format!(
                "polynomial 0x{:x} does not fit in {} bits",
                self.polynomial, self.width
            )));
        }
        Ok(())
    }

    /// Remainder of the message polynomial times `x^width`, i.e. the value
    /// whose bits are appended to make the whole message divide the
    /// generator.
    pub fn remainder(&self, bits: &[Bit]) -> u64 {
        let mask = (1u64 << self.width) - 1;
        if !self.reflect {
            let top = 1u64 << (self.width - 1);
            let mut reg = self.initial_value & mask;
            for &b in bits {
                let feedback = ((reg & top) != 0) ^ (b != 0);
                reg = (reg << 1) & mask;
                if feedback {
                    reg ^= self.polynomial & mask;
                }
            }
            reg
        } else {
            let poly_rev = reverse_bits(self.polynomial & mask, self.width);
            let mut reg = self.initial_value & mask;
            for &b in bits {
                let feedback = (reg ^ u64::from(b)) & 1;
                reg >>= 1;
                if feedback != 0 {
                    reg ^= poly_rev;
                }
            }
            reg
        }
    }

    /// Check bits in transmission order (most significant first for the
    /// normal form, least significant first when reflected).
    pub fn checksum_bits(&self, bits: &[Bit]) -> Vec<Bit> {
        let rem = self.remainder(bits);
        (0..self.width)
            .map(|i| {
                let pos = if self.reflect { i } else { self.width - 1 - i };
                ((rem >> pos) & 1) as Bit
            })
            .collect()
    }
}

fn reverse_bits(v: u64, width: u32) -> u64 {
    let mut out = 0u64;
    for i in 0..width {
        out |= ((v >> i) & 1) << (width - 1 - i);
    }
    out
}

/// A constructed code: family, block length, frozen/information split, and
/// optional CRC.
///
/// Immutable after construction; safe to share across decoder instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CodeSpecWire", into = "CodeSpecWire")]
pub struct CodeSpec {
    family: CodeFamily,
    n: u32,
    k: usize,
    frozen_mask: Vec<bool>,
    info: Vec<usize>,
    crc: Option<CrcSpec>,
    design_snr_db: Option<f64>,
}

/// Serialized form carrying the explicit frozen-index list.
#[derive(Serialize, Deserialize)]
struct CodeSpecWire {
    family: CodeFamily,
    n: u32,
    k: usize,
    frozen: Vec<usize>,
    crc: Option<CrcSpec>,
    design_snr_db: Option<f64>,
}

impl From<CodeSpec> for CodeSpecWire {
    fn from(c: CodeSpec) -> Self {
        CodeSpecWire {
            family: c.family,
            n: c.n,
            k: c.k,
            frozen: c.frozen_positions(),
            crc: c.crc,
            design_snr_db: c.design_snr_db,
        }
    }
}

impl TryFrom<CodeSpecWire> for CodeSpec {
    type Error = Error;

    fn try_from(w: CodeSpecWire) -> Result<Self> {
        let code = CodeSpec::from_frozen(w.family, w.n, &w.frozen)?;
        if code.k != w.k {
            return Err(Error::InvalidConfig {
                what: "code spec",
                detail: format!("K = {} inconsistent with frozen set of size {}", w.k, w.frozen.len()),
            });
        }
        let code = CodeSpec {
            design_snr_db: w.design_snr_db,
            ..code
        };
        match w.crc {
            Some(crc) => code.with_crc(crc),
            None => Ok(code),
        }
    }
}

impl CodeSpec {
    fn check_exponent(n: u32) -> Result<()> {
        if !(1..=30).contains(&n) {
            return Err(Error::InvalidBlockExponent(n));
        }
        Ok(())
    }

    fn from_mask(family: CodeFamily, n: u32, frozen_mask: Vec<bool>) -> Self {
        let info = frozen_mask
            .iter()
            .enumerate()
            .filter(|(_, &f)| !f)
            .map(|(i, _)| i)
            .collect::<Vec<_>>();
        let k = info.len();
        CodeSpec {
            family,
            n,
            k,
            frozen_mask,
            info,
            crc: None,
            design_snr_db: None,
        }
    }

    /// Build a code from an explicit frozen set.
    pub fn from_frozen(family: CodeFamily, n: u32, frozen: &[usize]) -> Result<Self> {
        Self::check_exponent(n)?;
        let block_len = 1usize << n;
        let mut mask = vec![false; block_len];
        for &i in frozen {
            if i >= block_len {
                return Err(Error::InvalidConfig {
                    what: "frozen set",
                    detail: format!("index {i} out of range for N = {block_len}"),
                });
            }
            mask[i] = true;
        }
        Ok(Self::from_mask(family, n, mask))
    }

    /// Attach a CRC. Its check bits occupy the last `width` information
    /// positions, so the payload shrinks to `K - width` bits.
    pub fn with_crc(mut self, crc: CrcSpec) -> Result<Self> {
        crc.validate()?;
        if crc.width as usize >= self.k {
            return Err(Error::InvalidCrc(format!(
                "width {} leaves no payload in K = {}",
                crc.width, self.k
            )));
        }
        self.crc = Some(crc);
        Ok(self)
    }

    pub fn family(&self) -> CodeFamily {
        self.family
    }

    /// log2 of the block length.
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn block_len(&self) -> usize {
        1usize << self.n
    }

    /// Number of information positions, CRC bits included when attached.
    pub fn dimension(&self) -> usize {
        self.k
    }

    /// Information bits carried per frame, CRC bits excluded.
    pub fn payload_len(&self) -> usize {
        match self.crc {
            Some(c) => self.k - c.width as usize,
            None => self.k,
        }
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.block_len() as f64
    }

    pub fn crc(&self) -> Option<&CrcSpec> {
        self.crc.as_ref()
    }

    pub fn design_snr_db(&self) -> Option<f64> {
        self.design_snr_db
    }

    pub fn is_frozen(&self, index: usize) -> bool {
        self.frozen_mask[index]
    }

    pub fn frozen_mask(&self) -> &[bool] {
        &self.frozen_mask
    }

    pub fn frozen_positions(&self) -> Vec<usize> {
        (0..self.block_len()).filter(|&i| self.frozen_mask[i]).collect()
    }

    /// Information positions in ascending index order.
    pub fn info_positions(&self) -> &[usize] {
        &self.info
    }

    /// Reed-Muller code of length `2^n` and dimension `k`.
    ///
    /// The information set consists of the `k` indices with the largest
    /// binary Hamming weight (equivalently, the heaviest generator rows), so
    /// `k` must equal a partial binomial sum; other values would split a
    /// weight class and are rejected.
    pub fn reed_muller(n: u32, k: usize) -> Result<Self> {
        Self::check_exponent(n)?;
        let block_len = 1usize << n;
        if k == 0 || k > block_len {
            return Err(Error::DimensionOutOfRange { k, block_len });
        }
        let dims = rm_dimensions(n);
        let order = match dims.iter().position(|&d| d == k) {
            Some(m) => m as u32,
            None => {
                let below = dims.iter().copied().filter(|&d| d < k).max().unwrap_or(0);
                let above = dims.iter().copied().find(|&d| d > k).unwrap_or(block_len);
                return Err(Error::RmDimension { n, k, below, above });
            }
        };
        // Order-m selection keeps rows of weight >= 2^(n-m), i.e. indices of
        // Hamming weight >= n - m.
        let threshold = n - order;
        let mask = (0..block_len)
            .map(|i| (i.count_ones()) < threshold)
            .collect::<Vec<_>>();
        Ok(Self::from_mask(CodeFamily::ReedMuller, n, mask))
    }

    /// Polar code of length `2^n` and dimension `k`, constructed by density
    /// evolution under the Gaussian approximation for a BPSK-AWGN channel.
    ///
    /// `design_snr_db` is interpreted as Eb/N0 at the code rate `k / 2^n`.
    pub fn polar(n: u32, k: usize, design_snr_db: f64) -> Result<Self> {
        Self::check_exponent(n)?;
        let block_len = 1usize << n;
        if k == 0 || k > block_len {
            return Err(Error::DimensionOutOfRange { k, block_len });
        }
        let rate = k as f64 / block_len as f64;
        let order = polar_reliability_order(n, design_snr_db, rate);
        let mut mask = vec![true; block_len];
        for &i in order.iter().take(k) {
            mask[i] = false;
        }
        let mut code = Self::from_mask(CodeFamily::Polar, n, mask);
        code.design_snr_db = Some(design_snr_db);
        Ok(code)
    }

    /// Encode a full input vector: `x = u · G^{⊗n}` over GF(2).
    ///
    /// `u` must have block length and zeros at every frozen position.
    pub fn encode(&self, u: &[Bit]) -> Result<Vec<Bit>> {
        let block_len = self.block_len();
        if u.len() != block_len {
            return Err(Error::LengthMismatch {
                expected: block_len,
                got: u.len(),
            });
        }
        for (i, &b) in u.iter().enumerate() {
            if b > 1 {
                return Err(Error::NonBinary(i));
            }
            if b == 1 && self.frozen_mask[i] {
                return Err(Error::FrozenBitSet(i));
            }
        }
        let mut x = u.to_vec();
        kronecker_transform(&mut x);
        Ok(x)
    }

    /// Append CRC check bits to a payload, producing the `K` bits that go
    /// into the information positions in index order.
    pub fn attach_crc(&self, payload: &[Bit]) -> Result<Vec<Bit>> {
        let crc = self.crc.ok_or(Error::MissingCrc)?;
        let expected = self.k - crc.width as usize;
        if payload.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: payload.len(),
            });
        }
        let mut out = payload.to_vec();
        out.extend(crc.checksum_bits(payload));
        Ok(out)
    }

    /// Verify the CRC of a `K`-bit message (payload followed by check bits).
    pub fn check_crc(&self, message: &[Bit]) -> Result<bool> {
        let crc = self.crc.ok_or(Error::MissingCrc)?;
        if message.len() != self.k {
            return Err(Error::LengthMismatch {
                expected: self.k,
                got: message.len(),
            });
        }
        let split = self.k - crc.width as usize;
        Ok(crc.checksum_bits(&message[..split]) == message[split..])
    }

    /// Plain-text fixture form: family, dimensions, CRC, and the explicit
    /// frozen-index list.
    pub fn to_fixture_string(&self) -> String {
        let mut s = String::new();
        let fam = match self.family {
            CodeFamily::Polar => "polar",
            CodeFamily::ReedMuller => "rm",
        };
        s.push_str(&format!("family {fam}\n"));
        s.push_str(&format!("n {}\n", self.n));
        s.push_str(&format!("k {}\n", self.k));
        if let Some(snr) = self.design_snr_db {
            s.push_str(&format!("design_snr_db {snr:?}\n"));
        }
        if let Some(c) = self.crc {
            s.push_str(&format!(
                "crc width={} poly=0x{:x} init=0x{:x} reflect={}\n",
                c.width, c.polynomial, c.initial_value, c.reflect
            ));
        }
        let frozen = self
            .frozen_positions()
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        s.push_str(&format!("frozen {frozen}\n"));
        s
    }

    /// Parse the format produced by [`CodeSpec::to_fixture_string`].
    pub fn from_fixture_str(text: &str) -> Result<Self> {
        let mut family = None;
        let mut n = None;
        let mut k = None;
        let mut frozen: Option<Vec<usize>> = None;
        let mut crc = None;
        let mut design = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, rest) = line
                .split_once(char::is_whitespace)
                .unwrap_or((line, ""));
            let rest = rest.trim();
            match key {
                "family" => {
                    family = Some(match rest {
                        "polar" => CodeFamily::Polar,
                        "rm" => CodeFamily::ReedMuller,
                        other => {
                            return Err(Error::FixtureParse(format!("unknown family {other:?}")))
                        }
                    })
                }
                "n" => n = Some(parse_num::<u32>("n", rest)?),
                "k" => k = Some(parse_num::<usize>("k", rest)?),
                "design_snr_db" => design = Some(parse_num::<f64>("design_snr_db", rest)?),
                "crc" => crc = Some(parse_crc(rest)?),
                "frozen" => {
                    let mut v = Vec::new();
                    for tok in rest.split_whitespace() {
                        v.push(parse_num::<usize>("frozen index", tok)?);
                    }
                    frozen = Some(v);
                }
                other => return Err(Error::FixtureParse(format!("unknown key {other:?}"))),
            }
        }
        let family = family.ok_or_else(|| Error::FixtureParse("missing family".into()))?;
        let n = n.ok_or_else(|| Error::FixtureParse("missing n".into()))?;
        let frozen = frozen.ok_or_else(|| Error::FixtureParse("missing frozen list".into()))?;
        let mut code = CodeSpec::from_frozen(family, n, &frozen)?;
        if let Some(k) = k {
            if k != code.k {
                return Err(Error::FixtureParse(format!(
                    "k {} does not match frozen set (implies k = {})",
                    k, code.k
                )));
            }
        }
        code.design_snr_db = design;
        match crc {
            Some(c) => code.with_crc(c),
            None => Ok(code),
        }
    }
}

fn parse_num<T: std::str::FromStr>(what: &str, tok: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::FixtureParse(format!("bad {what}: {tok:?}")))
}

fn parse_crc(rest: &str) -> Result<CrcSpec> {
    let mut width = None;
    let mut poly = None;
    let mut init = 0u64;
    let mut reflect = false;
    for tok in rest.split_whitespace() {
        let (key, val) = tok
            .split_once('=')
            .ok_or_else(|| Error::FixtureParse(format!("bad crc field {tok:?}")))?;
        match key {
            "width" => width = Some(parse_num::<u32>("crc width", val)?),
            "poly" => poly = Some(parse_hex(val)?),
            "init" => init = parse_hex(val)?,
            "reflect" => reflect = val == "true",
            other => return Err(Error::FixtureParse(format!("unknown crc field {other:?}"))),
        }
    }
    Ok(CrcSpec {
        width: width.ok_or_else(|| Error::FixtureParse("missing crc width".into()))?,
        polynomial: poly.ok_or_else(|| Error::FixtureParse("missing crc poly".into()))?,
        initial_value: init,
        reflect,
    })
}

fn parse_hex(tok: &str) -> Result<u64> {
    let digits = tok.strip_prefix("0x").unwrap_or(tok);
    u64::from_str_radix(digits, 16)
        .map_err(|_| Error::FixtureParse(format!("bad hex value {tok:?}")))
}

/// Achievable Reed-Muller dimensions for length `2^n`: partial binomial sums
/// indexed by order m.
pub fn rm_dimensions(n: u32) -> Vec<usize> {
    let mut dims = Vec::with_capacity(n as usize + 1);
    let mut sum = 0usize;
    let mut binom = 1usize;
    for m in 0..=n {
        sum += binom;
        dims.push(sum);
        // C(n, m+1) from C(n, m)
        binom = binom * (n - m) as usize / (m + 1) as usize;
    }
    dims
}

/// In-place `x <- x · G^{⊗n}` over GF(2) via the butterfly structure,
/// O(N log N). The transform is involutive.
pub fn kronecker_transform(x: &mut [Bit]) {
    let len = x.len();
    debug_assert!(len.is_power_of_two());
    let mut stride = 1;
    while stride < len {
        let mut base = 0;
        while base < len {
            for i in base..base + stride {
                x[i] ^= x[i + stride];
            }
            base += 2 * stride;
        }
        stride *= 2;
    }
}

// --- Gaussian-approximation density evolution ---------------------------
//
// phi(x) = E[tanh(L/2)] complement for L ~ N(x, 2x), piecewise per the usual
// two-branch fit; the check-node update is mu <- phi_inv(1 - (1 - phi(mu))^2)
// and the variable-node update doubles the mean.

const GA_SEAM: f64 = 10.0;

fn ga_phi(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < GA_SEAM {
        (-0.4527 * x.powf(0.86) + 0.0218).exp()
    } else {
        ((std::f64::consts::PI / x).sqrt() * (-x / 4.0).exp() * (1.0 - 10.0 / (7.0 * x))).max(0.0)
    }
}

fn ga_phi_inv(y: f64) -> f64 {
    if y >= 1.0 {
        return 0.0;
    }
    let seam_value = ga_phi(GA_SEAM - 1e-12);
    if y >= seam_value {
        return ((0.0218 - y.ln()) / 0.4527).powf(1.0 / 0.86);
    }
    // Bisect the decreasing tail branch.
    let mut lo = GA_SEAM;
    let mut hi = GA_SEAM;
    while ga_phi(hi) > y {
        hi *= 2.0;
        if hi > 1e12 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ga_phi(mid) > y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Mean LLRs of all `2^n` bit-channels for a channel LLR mean `mu0`, in
/// natural bit-channel order.
fn ga_llr_means(n: u32, mu0: f64) -> Vec<f64> {
    let mut means = vec![mu0];
    for _ in 0..n {
        let mut next = Vec::with_capacity(means.len() * 2);
        for &mu in &means {
            let p = ga_phi(mu);
            let z = 1.0 - (1.0 - p) * (1.0 - p);
            next.push(ga_phi_inv(z));
            next.push(2.0 * mu);
        }
        means = next;
    }
    means
}

/// Bit-channel indices sorted from most to least reliable; ties broken
/// toward the smaller index so construction is deterministic.
pub fn polar_reliability_order(n: u32, design_ebn0_db: f64, rate: f64) -> Vec<usize> {
    let sigma_sq = 1.0 / (2.0 * rate * 10f64.powf(design_ebn0_db / 10.0));
    let mu0 = 2.0 / sigma_sq;
    let means = ga_llr_means(n, mu0);
    let mut order: Vec<usize> = (0..means.len()).collect();
    order.sort_by(|&a, &b| means[b].total_cmp(&means[a]).then(a.cmp(&b)));
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rm_8_4_frozen_set() {
        let code = CodeSpec::reed_muller(3, 4).unwrap();
        assert_eq!(code.frozen_positions(), vec![0, 1, 2, 4]);
        assert_eq!(code.info_positions(), &[3, 5, 6, 7]);
    }

    #[test]
    fn rm_rate_one() {
        let code = CodeSpec::reed_muller(3, 8).unwrap();
        assert!(code.frozen_positions().is_empty());
        assert_eq!(code.info_positions(), (0..8).collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn rm_16_11_selects_weight_two_and_up() {
        // C(4,0)+C(4,1) = 5 frozen, 11 info.
        let code = CodeSpec::reed_muller(4, 11).unwrap();
        let info: Vec<usize> = (0..16).filter(|i: &usize| i.count_ones() >= 2).collect();
        assert_eq!(code.info_positions(), info.as_slice());
    }

    #[test]
    fn rm_rejects_split_weight_class() {
        let err = CodeSpec::reed_muller(3, 5).unwrap_err();
        match err {
            Error::RmDimension { below, above, .. } => {
                assert_eq!(below, 4);
                assert_eq!(above, 7);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rm_dimension_table() {
        assert_eq!(rm_dimensions(3), vec![1, 4, 7, 8]);
        assert_eq!(rm_dimensions(7), vec![1, 8, 29, 64, 99, 120, 127, 128]);
    }

    #[test]
    fn rm_weight_classes_never_split() {
        for n in 1..=8u32 {
            for &k in &rm_dimensions(n) {
                let code = CodeSpec::reed_muller(n, k).unwrap();
                for w in 0..=n {
                    let statuses: Vec<bool> = (0..code.block_len())
                        .filter(|i| i.count_ones() == w)
                        .map(|i| code.is_frozen(i))
                        .collect();
                    assert!(
                        statuses.windows(2).all(|p| p[0] == p[1]),
                        "weight class {w} split for RM n={n} k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn polar_n1_k1_keeps_upgraded_channel() {
        let code = CodeSpec::polar(1, 1, 0.0).unwrap();
        assert_eq!(code.info_positions(), &[1]);
    }

    #[test]
    fn polar_rate_one_selects_everything() {
        let code = CodeSpec::polar(3, 8, 2.0).unwrap();
        assert!(code.frozen_positions().is_empty());
    }

    #[test]
    fn polar_nesting_at_fixed_design_snr() {
        let mut prev: Option<Vec<usize>> = None;
        for k in 1..=128 {
            let code = CodeSpec::polar(7, k, 6.0).unwrap();
            let info = code.info_positions().to_vec();
            if let Some(p) = prev {
                assert!(
                    p.iter().all(|i| info.contains(i)),
                    "info set not nested at K = {k}"
                );
            }
            prev = Some(info);
        }
    }

    #[test]
    fn encode_zero_and_last_row() {
        let code = CodeSpec::reed_muller(3, 8).unwrap();
        assert_eq!(code.encode(&[0; 8]).unwrap(), vec![0; 8]);
        // Last generator row is all ones.
        let mut u = [0u8; 8];
        u[7] = 1;
        assert_eq!(code.encode(&u).unwrap(), vec![1; 8]);
    }

    #[test]
    fn encode_matches_dense_matrix_oracle() {
        // u with bits 3,5,6,7 set, multiplied row-by-row against G^{⊗3}.
        let code = CodeSpec::reed_muller(3, 4).unwrap();
        let mut u = [0u8; 8];
        for i in [3, 5, 6, 7] {
            u[i] = 1;
        }
        assert_eq!(code.encode(&u).unwrap(), vec![0, 1, 1, 0, 1, 0, 0, 1]);
    }

    #[test]
    fn encode_rejects_nonzero_frozen() {
        let code = CodeSpec::reed_muller(3, 4).unwrap();
        let mut u = [0u8; 8];
        u[0] = 1; // frozen position
        assert!(matches!(code.encode(&u), Err(Error::FrozenBitSet(0))));
    }

    #[test]
    fn crc11_single_bit_payload() {
        // Long-division oracle: remainder of x^11 mod g is g - x^11.
        let crc = CrcSpec::crc11();
        assert_eq!(crc.remainder(&[1]), 0x621);
        assert_eq!(
            crc.checksum_bits(&[1]),
            vec![1, 1, 0, 0, 0, 1, 0, 0, 0, 0, 1]
        );
    }

    #[test]
    fn crc_attach_check_roundtrip() {
        let code = CodeSpec::polar(5, 20, 2.0)
            .unwrap()
            .with_crc(CrcSpec::crc11())
            .unwrap();
        let payload = vec![1, 0, 1, 1, 0, 0, 1, 0, 1];
        let msg = code.attach_crc(&payload).unwrap();
        assert_eq!(msg.len(), 20);
        assert!(code.check_crc(&msg).unwrap());

        // Zero payload with zero init has a zero remainder.
        let zeros = code.attach_crc(&vec![0; 9]).unwrap();
        assert_eq!(zeros, vec![0; 20]);

        // Any single-bit flip is detected.
        for i in 0..msg.len() {
            let mut bad = msg.clone();
            bad[i] ^= 1;
            assert!(!code.check_crc(&bad).unwrap(), "flip at {i} undetected");
        }
    }

    #[test]
    fn crc_check_equals_zero_remainder() {
        // With zero initial value, checking equals dividing the whole
        // message and comparing the remainder with zero.
        let crc = CrcSpec::crc11();
        let msg = [1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 1];
        let mut full = msg.to_vec();
        full.extend(crc.checksum_bits(&msg));
        assert_eq!(crc.remainder(&full), 0);
    }

    #[test]
    fn crc_reflected_roundtrip() {
        let crc = CrcSpec {
            width: 11,
            polynomial: 0x621,
            initial_value: 0,
            reflect: true,
        };
        let msg = [1, 1, 0, 1, 0, 0, 0, 1, 1];
        let mut full = msg.to_vec();
        full.extend(crc.checksum_bits(&msg));
        assert_eq!(crc.remainder(&full), 0);
    }

    #[test]
    fn crc_undetected_rate_is_about_two_to_minus_eleven() {
        use rand::{Rng, SeedableRng};
        let code = CodeSpec::polar(7, 64, 6.0)
            .unwrap()
            .with_crc(CrcSpec::crc11())
            .unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xC4C);
        let trials = 10_000;
        let mut passes = 0;
        for _ in 0..trials {
            let msg: Vec<u8> = (0..64).map(|_| rng.random_range(0..2u8)).collect();
            if code.check_crc(&msg).unwrap() {
                passes += 1;
            }
        }
        // Expected ~ trials * 2^-11 = 4.9.
        assert!((1..=20).contains(&passes), "got {passes} passes");
    }

    #[test]
    fn missing_crc_is_an_error() {
        let code = CodeSpec::reed_muller(4, 11).unwrap();
        assert!(matches!(code.attach_crc(&[0; 5]), Err(Error::MissingCrc)));
        assert!(matches!(code.check_crc(&[0; 11]), Err(Error::MissingCrc)));
    }

    #[test]
    fn fixture_roundtrip() {
        let code = CodeSpec::polar(6, 32, 4.0)
            .unwrap()
            .with_crc(CrcSpec::crc11())
            .unwrap();
        let text = code.to_fixture_string();
        let parsed = CodeSpec::from_fixture_str(&text).unwrap();
        assert_eq!(parsed, code);

        let rm = CodeSpec::reed_muller(5, 16).unwrap();
        assert_eq!(CodeSpec::from_fixture_str(&rm.to_fixture_string()).unwrap(), rm);
    }

    #[test]
    fn serde_roundtrip_carries_frozen_set() {
        let code = CodeSpec::polar(7, 64, 6.0).unwrap();
        let json = serde_json::to_string(&code).unwrap();
        let back: CodeSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, code);
    }

    #[test]
    fn construction_is_deterministic() {
        let a = CodeSpec::polar(7, 64, 6.0).unwrap();
        let b = CodeSpec::polar(7, 64, 6.0).unwrap();
        assert_eq!(a, b);
        let c = CodeSpec::reed_muller(7, 64).unwrap();
        let d = CodeSpec::reed_muller(7, 64).unwrap();
        assert_eq!(c, d);
    }
}
