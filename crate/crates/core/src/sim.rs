//! Monte Carlo FER/BER estimation.
//!
//! Every frame owns an RNG seeded from `(seed, Eb/N0, frame index)`, so a
//! run is reproducible bit-for-bit at any worker count. Frames are processed
//! in fixed-size batches; the early-stop condition is evaluated only on
//! batch boundaries, which keeps the set of simulated frames independent of
//! scheduling.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{modulate, transmit, ChannelParams};
use crate::code::CodeSpec;
use crate::decode::{pm_penalty_exact, DecodeOptions, Decoder, FKernel, PmUpdate, SpCandidates};
use crate::{Bit, Error, Result};

/// Frames per scheduling batch. Stop conditions are checked after each
/// batch, so results never depend on the worker count.
const BATCH_FRAMES: u64 = 1024;

/// Points with fewer frame errors than this are considered statistically
/// unreliable.
const LOW_CONFIDENCE_ERRORS: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    Sc,
    Scl,
    Spsc,
    Spscl,
}

impl DecoderKind {
    pub fn uses_list(self) -> bool {
        matches!(self, DecoderKind::Scl | DecoderKind::Spscl)
    }
}

/// Full description of a simulation run; serializable for provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub code: CodeSpec,
    pub decoder: DecoderKind,
    pub list_size: usize,
    pub snr_points: Vec<f64>,
    pub max_frames: u64,
    pub min_frame_errors: u64,
    pub seed: u64,
    pub workers: usize,
    pub f_mode: FKernel,
    pub ml_bound_mode: bool,
    /// Transmit the all-zero codeword instead of random payloads. Off by
    /// default; intended for symmetry-based property tests without CRC.
    #[serde(default)]
    pub all_zero_codeword: bool,
}

impl SimConfig {
    pub fn new(code: CodeSpec, decoder: DecoderKind) -> Self {
        Self {
            code,
            decoder,
            list_size: 8,
            snr_points: Vec::new(),
            max_frames: 10_000_000,
            min_frame_errors: 100,
            seed: 0,
            workers: 1,
            f_mode: FKernel::MinSum,
            ml_bound_mode: false,
            all_zero_codeword: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_frames == 0 {
            return Err(Error::InvalidConfig {
                what: "max_frames",
                detail: "must be at least 1".into(),
            });
        }
        if self.min_frame_errors == 0 {
            return Err(Error::InvalidConfig {
                what: "min_frame_errors",
                detail: "must be at least 1".into(),
            });
        }
        if self.decoder.uses_list() && self.list_size == 0 {
            return Err(Error::InvalidConfig {
                what: "list_size",
                detail: "must be at least 1".into(),
            });
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig {
                what: "workers",
                detail: "must be at least 1".into(),
            });
        }
        Ok(())
    }

    fn decode_options(&self) -> DecodeOptions {
        DecodeOptions {
            f: self.f_mode,
            pm: PmUpdate::Exact,
            sp_candidates: SpCandidates::AllRotations,
            record_shifts: false,
        }
    }
}

/// One simulated operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FerPoint {
    pub ebn0_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub fer: f64,
    pub ber: f64,
    /// Relative half-width of the 95% binomial CI on the FER; infinite when
    /// no errors were observed.
    pub ci95_rel: f64,
    pub elapsed_s: f64,
}

impl FerPoint {
    fn from_counts(
        ebn0_db: f64,
        frames: u64,
        frame_errors: u64,
        bit_errors: u64,
        payload_len: usize,
        elapsed_s: f64,
    ) -> Self {
        let fer = frame_errors as f64 / frames as f64;
        let ber = bit_errors as f64 / (frames as f64 * payload_len as f64);
        let (lo, hi) = wilson_ci95(frame_errors, frames);
        let ci95_rel = if fer > 0.0 {
            (hi - lo) / (2.0 * fer)
        } else {
            f64::INFINITY
        };
        Self {
            ebn0_db,
            frames,
            frame_errors,
            bit_errors,
            fer,
            ber,
            ci95_rel,
            elapsed_s,
        }
    }

    /// 95% Wilson score interval on the FER.
    pub fn ci95(&self) -> (f64, f64) {
        wilson_ci95(self.frame_errors, self.frames)
    }

    pub fn low_confidence(&self) -> bool {
        self.frame_errors < LOW_CONFIDENCE_ERRORS
    }
}

/// 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_ci95(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054_f64;
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Per-frame RNG seed: a splitmix64 finalizer over the global seed, the
/// operating point, and the frame index.
pub fn frame_seed(seed: u64, ebn0_db: f64, frame_index: u64) -> u64 {
    let mut x = seed
        ^ ebn0_db.to_bits().wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ frame_index.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    x
}

#[derive(Default, Clone, Copy)]
struct FrameTally {
    frame_errors: u64,
    ml_errors: u64,
    bit_errors: u64,
}

impl FrameTally {
    fn add(self, other: Self) -> Self {
        Self {
            frame_errors: self.frame_errors + other.frame_errors,
            ml_errors: self.ml_errors + other.ml_errors,
            bit_errors: self.bit_errors + other.bit_errors,
        }
    }
}

struct PointRunner<'a> {
    config: &'a SimConfig,
    params: ChannelParams,
    decoder: Decoder<'a>,
    ml_mode: bool,
}

impl PointRunner<'_> {
    fn simulate_frame(&self, seed: u64) -> FrameTally {
        let code = &self.config.code;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let payload: Vec<Bit> = if self.config.all_zero_codeword {
            vec![0; code.payload_len()]
        } else {
            (0..code.payload_len()).map(|_| rng.random_range(0..2)).collect()
        };
        let message = match code.crc() {
            Some(_) => code.attach_crc(&payload).expect("payload length checked"),
            None => payload.clone(),
        };
        let mut u = vec![0; code.block_len()];
        for (&pos, &bit) in code.info_positions().iter().zip(message.iter()) {
            u[pos] = bit;
        }
        let x = code.encode(&u).expect("valid input vector");
        let frame = transmit(&modulate(&x), &self.params, &mut rng);

        let result = match self.config.decoder {
            DecoderKind::Sc => self.decoder.sc(&frame),
            DecoderKind::Spsc => self.decoder.spsc(&frame),
            DecoderKind::Scl => self.decoder.scl(&frame, self.config.list_size),
            DecoderKind::Spscl => self.decoder.spscl(&frame, self.config.list_size),
        }
        .expect("frame length matches the code");

        let payload_hat: Vec<Bit> = code
            .info_positions()
            .iter()
            .take(code.payload_len())
            .map(|&i| result.u_hat[i])
            .collect();
        let bit_errors = payload
            .iter()
            .zip(payload_hat.iter())
            .filter(|(a, b)| a != b)
            .count() as u64;
        let frame_error = bit_errors > 0;

        let ml_error = if frame_error && self.ml_mode {
            // Compare exact codeword likelihood metrics: a frame counts only
            // when the decoder's pick is strictly more likely than the
            // transmitted word, in which case a maximum-likelihood decoder
            // would have erred too.
            let m_hat = codeword_metric(frame.as_slice(), &result.x_hat);
            let m_true = codeword_metric(frame.as_slice(), &x);
            m_hat < m_true
        } else {
            false
        };

        FrameTally {
            frame_errors: u64::from(frame_error),
            ml_errors: u64::from(ml_error),
            bit_errors,
        }
    }
}

/// Exact negative log-likelihood of a codeword against channel LLRs, up to a
/// codeword-independent constant: `sum_i ln(1 + e^{-(1-2x_i) alpha_i})`.
/// Equal to the path metric a list decoder with exact updates assigns to the
/// corresponding input sequence.
pub fn codeword_metric(alpha: &[f64], x: &[Bit]) -> f64 {
    debug_assert_eq!(alpha.len(), x.len());
    alpha
        .iter()
        .zip(x.iter())
        .map(|(&a, &b)| pm_penalty_exact(a, b))
        .sum()
}

fn run_point_inner(config: &SimConfig, ebn0_db: f64, ml_mode: bool) -> Result<FerPoint> {
    config.validate()?;
    if ml_mode && !config.decoder.uses_list() {
        return Err(Error::MlBoundNeedsList);
    }
    let code = &config.code;
    let runner = PointRunner {
        config,
        params: ChannelParams::new(ebn0_db, code.rate(), config.seed),
        decoder: Decoder::new(code, config.decode_options()),
        ml_mode,
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidConfig {
            what: "workers",
            detail: e.to_string(),
        })?;

    let start = Instant::now();
    let mut frames = 0u64;
    let mut tally = FrameTally::default();
    while frames < config.max_frames {
        let stop_count = if ml_mode {
            tally.ml_errors
        } else {
            tally.frame_errors
        };
        if stop_count >= config.min_frame_errors {
            break;
        }
        let batch = BATCH_FRAMES.min(config.max_frames - frames);
        let batch_tally = pool.install(|| {
            (frames..frames + batch)
                .into_par_iter()
                .map(|i| runner.simulate_frame(frame_seed(config.seed, ebn0_db, i)))
                .reduce(FrameTally::default, FrameTally::add)
        });
        tally = tally.add(batch_tally);
        frames += batch;
    }

    let counted_errors = if ml_mode {
        tally.ml_errors
    } else {
        tally.frame_errors
    };
    Ok(FerPoint::from_counts(
        ebn0_db,
        frames,
        counted_errors,
        tally.bit_errors,
        code.payload_len(),
        start.elapsed().as_secs_f64(),
    ))
}

/// Simulate one operating point until `min_frame_errors` frame errors or
/// `max_frames` frames, whichever comes first.
pub fn run_point(config: &SimConfig, ebn0_db: f64) -> Result<FerPoint> {
    run_point_inner(config, ebn0_db, false)
}

/// Lower bound on maximum-likelihood FER: only decoder errors whose output
/// is strictly more likely than the transmitted codeword are counted.
pub fn run_ml_bound(config: &SimConfig, ebn0_db: f64) -> Result<FerPoint> {
    run_point_inner(config, ebn0_db, true)
}

/// Run every configured SNR point in order. Warns (via `log`) when the FER
/// increases significantly between adjacent points.
pub fn run_sweep(config: &SimConfig) -> Result<Vec<FerPoint>> {
    config.validate()?;
    let mut points = Vec::with_capacity(config.snr_points.len());
    for &snr in &config.snr_points {
        let point = if config.ml_bound_mode {
            run_ml_bound(config, snr)?
        } else {
            run_point(config, snr)?
        };
        if let Some(prev) = points.last() {
            let prev: &FerPoint = prev;
            let (_, prev_hi) = prev.ci95();
            let (lo, _) = point.ci95();
            if lo > prev_hi {
                log::warn!(
                    "FER increased from {:.3e} @ {} dB to {:.3e} @ {} dB beyond CI overlap",
                    prev.fer,
                    prev.ebn0_db,
                    point.fer,
                    point.ebn0_db
                );
            }
        }
        points.push(point);
    }
    Ok(points)
}

/// CSV header matching [`FerPoint::csv_row`].
pub fn csv_header() -> &'static str {
    "ebn0_db,frames,frame_errors,bit_errors,fer,ber,ci95_rel,elapsed_s"
}

impl FerPoint {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            fmt_f64(self.ebn0_db),
            self.frames,
            self.frame_errors,
            self.bit_errors,
            fmt_f64(self.fer),
            fmt_f64(self.ber),
            fmt_f64(self.ci95_rel),
            fmt_f64(self.elapsed_s)
        )
    }
}

/// Format a float so that integral values keep a trailing `.0` and all
/// values parse back exactly.
pub fn fmt_f64(v: f64) -> String {
    let s = format!("{v}");
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}
