//! Batch FER/BER sweeps for polar and Reed-Muller codes.
//!
//! All run state comes from flags — no environment variables, no config
//! files — so a result file plus its embedded manifest is enough to replay a
//! run exactly.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use polarsp::code::{CodeSpec, CrcSpec};
use polarsp::decode::FKernel;
use polarsp::sim::{self, DecoderKind, FerPoint, SimConfig};

// Distinct exit codes per failure class; clap reports usage errors with its
// own code 2.
const EXIT_RANGE: u8 = 3;
const EXIT_DIMENSION: u8 = 4;
const EXIT_RM_DIMENSION: u8 = 5;
const EXIT_IO: u8 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CodeArg {
    Polar,
    Rm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CrcArg {
    None,
    #[value(name = "11")]
    Crc11,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DecoderArg {
    Sc,
    Scl,
    Spsc,
    Spscl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FArg {
    Exact,
    Minsum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Gnuplot,
}

#[derive(Debug, Parser)]
#[command(name = "polarsp", version, about = "Monte Carlo FER simulation of polar and Reed-Muller codes")]
struct Args {
    /// Code family.
    #[arg(long, value_enum)]
    code: CodeArg,

    /// log2 of the block length (N = 2^n).
    #[arg(long)]
    n: u32,

    /// Code dimension, CRC bits included when a CRC is attached.
    #[arg(long)]
    k: usize,

    /// Polar construction Eb/N0 in dB (ignored for RM codes).
    #[arg(long, default_value_t = 6.0)]
    design_snr: f64,

    /// CRC attached to the information bits.
    #[arg(long, value_enum, default_value_t = CrcArg::None)]
    crc: CrcArg,

    /// Decoding algorithm.
    #[arg(long, value_enum)]
    decoder: DecoderArg,

    /// List size for scl/spscl.
    #[arg(long, default_value_t = 8)]
    list: usize,

    /// Eb/N0 points: "start:step:stop" (stop inclusive) or a comma list.
    #[arg(long)]
    snr: String,

    /// Frame cap per point.
    #[arg(long, default_value_t = 10_000_000)]
    max_frames: u64,

    /// Stop a point early after this many frame errors.
    #[arg(long, default_value_t = 100)]
    min_errors: u64,

    /// Global RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,

    /// Boxplus kernel.
    #[arg(long, value_enum, default_value_t = FArg::Minsum)]
    f: FArg,

    /// Estimate the ML lower bound instead of the decoder FER.
    #[arg(long)]
    ml_bound: bool,

    /// Output path (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

/// Everything needed to reproduce a run, embedded in JSON and gnuplot
/// output.
#[derive(Debug, Serialize, Deserialize)]
struct RunManifest {
    tool_version: String,
    timestamp: String,
    host: String,
    config: SimConfig,
}

impl RunManifest {
    fn new(config: SimConfig) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            host: host_description(),
            config,
        }
    }
}

fn host_description() -> String {
    let name = std::env::var("HOSTNAME").unwrap_or_else(|_| "unknown".into());
    format!(
        "{} ({} {})",
        name,
        std::env::consts::OS,
        std::env::consts::ARCH
    )
}

#[derive(Debug)]
struct CliError {
    exit: u8,
    message: String,
}

impl CliError {
    fn new(exit: u8, message: impl Into<String>) -> Self {
        Self {
            exit,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.exit)
        }
    }
}

fn run(args: Args) -> Result<(), CliError> {
    let format = args.format;
    let out = args.out.clone();
    let config = build_config(args)?;
    let manifest = RunManifest::new(config.clone());

    let points = sim::run_sweep(&config)
        .map_err(|e| CliError::new(EXIT_RANGE, format!("simulation failed: {e}")))?;

    let rendered = render(&points, format, &manifest)
        .map_err(|e| CliError::new(EXIT_RANGE, e))?;
    match out {
        None => {
            print!("{rendered}");
            Ok(())
        }
        Some(path) => {
            let mut file = std::fs::File::create(&path).map_err(|e| {
                CliError::new(EXIT_IO, format!("--out: cannot write {}: {e}", path.display()))
            })?;
            file.write_all(rendered.as_bytes()).map_err(|e| {
                CliError::new(EXIT_IO, format!("--out: write to {} failed: {e}", path.display()))
            })
        }
    }
}

/// Translate flags into a validated simulation config.
fn build_config(args: Args) -> Result<SimConfig, CliError> {
    let block_len = 1usize
        .checked_shl(args.n)
        .filter(|_| (1..=30).contains(&args.n))
        .ok_or_else(|| CliError::new(EXIT_RANGE, format!("--n: {} outside 1..=30", args.n)))?;
    if args.k == 0 || args.k > block_len {
        return Err(CliError::new(
            EXIT_DIMENSION,
            format!("--k: {} outside 1..={} (N = 2^{})", args.k, block_len, args.n),
        ));
    }

    let code = match args.code {
        CodeArg::Rm => CodeSpec::reed_muller(args.n, args.k).map_err(|e| {
            CliError::new(EXIT_RM_DIMENSION, format!("--k: {e}"))
        })?,
        CodeArg::Polar => {
            if !args.design_snr.is_finite() {
                return Err(CliError::new(
                    EXIT_RANGE,
                    format!("--design-snr: {} is not finite", args.design_snr),
                ));
            }
            CodeSpec::polar(args.n, args.k, args.design_snr)
                .map_err(|e| CliError::new(EXIT_DIMENSION, format!("--k: {e}")))?
        }
    };
    let code = match args.crc {
        CrcArg::None => code,
        CrcArg::Crc11 => code
            .with_crc(CrcSpec::crc11())
            .map_err(|e| CliError::new(EXIT_DIMENSION, format!("--crc: {e}")))?,
    };

    let snr_points = parse_snr(&args.snr)
        .map_err(|e| CliError::new(EXIT_RANGE, format!("--snr: {e}")))?;
    if args.max_frames == 0 {
        return Err(CliError::new(EXIT_RANGE, "--max-frames: must be at least 1"));
    }
    if args.min_errors == 0 {
        return Err(CliError::new(EXIT_RANGE, "--min-errors: must be at least 1"));
    }
    if args.list == 0 {
        return Err(CliError::new(EXIT_RANGE, "--list: must be at least 1"));
    }

    let decoder = match args.decoder {
        DecoderArg::Sc => DecoderKind::Sc,
        DecoderArg::Scl => DecoderKind::Scl,
        DecoderArg::Spsc => DecoderKind::Spsc,
        DecoderArg::Spscl => DecoderKind::Spscl,
    };
    if args.ml_bound && !decoder.uses_list() {
        return Err(CliError::new(
            EXIT_RANGE,
            "--ml-bound: requires --decoder scl or spscl",
        ));
    }

    let workers = match args.workers {
        Some(0) => return Err(CliError::new(EXIT_RANGE, "--workers: must be at least 1")),
        Some(w) => w,
        None => std::thread::available_parallelism().map(usize::from).unwrap_or(1),
    };

    let mut config = SimConfig::new(code, decoder);
    config.list_size = args.list;
    config.snr_points = snr_points;
    config.max_frames = args.max_frames;
    config.min_frame_errors = args.min_errors;
    config.seed = args.seed;
    config.workers = workers;
    config.f_mode = match args.f {
        FArg::Exact => FKernel::Exact,
        FArg::Minsum => FKernel::MinSum,
    };
    config.ml_bound_mode = args.ml_bound;
    Ok(config)
}

/// `start:step:stop` (stop included when reachable within 1e-9) or a comma
/// list of dB values.
fn parse_snr(text: &str) -> Result<Vec<f64>, String> {
    let parse = |tok: &str| -> Result<f64, String> {
        let v: f64 = tok
            .trim()
            .parse()
            .map_err(|_| format!("bad value {tok:?}"))?;
        if !v.is_finite() {
            return Err(format!("value {tok:?} is not finite"));
        }
        Ok(v)
    };

    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("range must be start:step:stop, got {text:?}"));
        }
        let start = parse(parts[0])?;
        let step = parse(parts[1])?;
        let stop = parse(parts[2])?;
        if step <= 0.0 {
            return Err(format!("step must be positive, got {step}"));
        }
        if stop < start {
            return Err(format!("stop {stop} is below start {start}"));
        }
        let mut points = Vec::new();
        let mut i = 0u32;
        loop {
            let v = start + f64::from(i) * step;
            if v > stop + 1e-9 {
                break;
            }
            points.push(v);
            i += 1;
        }
        Ok(points)
    } else {
        let points: Result<Vec<f64>, String> = text.split(',').map(parse).collect();
        let points = points?;
        if points.is_empty() {
            return Err("no SNR points given".into());
        }
        Ok(points)
    }
}

fn render(points: &[FerPoint], format: FormatArg, manifest: &RunManifest) -> Result<String, String> {
    if points.is_empty() {
        return Err("no points to write".into());
    }
    Ok(match format {
        FormatArg::Csv => render_csv(points),
        FormatArg::Json => render_json(points, manifest),
        FormatArg::Gnuplot => render_gnuplot(points, manifest),
    })
}

fn render_csv(points: &[FerPoint]) -> String {
    let mut s = String::from(sim::csv_header());
    s.push('\n');
    for p in points {
        s.push_str(&p.csv_row());
        s.push('\n');
    }
    s
}

fn render_json(points: &[FerPoint], manifest: &RunManifest) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        manifest: &'a RunManifest,
        points: &'a [FerPoint],
    }
    let mut s = serde_json::to_string_pretty(&Doc { manifest, points })
        .expect("document serializes");
    s.push('\n');
    s
}

fn render_gnuplot(points: &[FerPoint], manifest: &RunManifest) -> String {
    let config_json = serde_json::to_string(&manifest.config).expect("config serializes");
    let mut s = format!(
        "# polarsp {} — generated {} on {}\n# config {}\n# ebn0_db fer\n",
        manifest.tool_version, manifest.timestamp, manifest.host, config_json
    );
    for p in points {
        s.push_str(&format!("{} {}\n", sim::fmt_f64(p.ebn0_db), sim::fmt_f64(p.fer)));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_args() -> Vec<&'static str> {
        vec![
            "polarsp", "--code", "rm", "--n", "7", "--k", "64", "--decoder", "spscl", "--list",
            "4", "--snr", "2:0.5:5", "--seed", "42",
        ]
    }

    #[test]
    fn full_flag_set_builds_a_config() {
        let args = Args::try_parse_from(base_args()).unwrap();
        let cfg = build_config(args).unwrap();
        assert_eq!(cfg.snr_points, vec![2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0]);
        assert_eq!(cfg.list_size, 4);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.decoder, DecoderKind::Spscl);
        assert_eq!(cfg.code.dimension(), 64);
        assert!(cfg.code.crc().is_none());
    }

    #[test]
    fn snr_range_endpoint_is_inclusive() {
        assert_eq!(parse_snr("1:0.25:1.5").unwrap(), vec![1.0, 1.25, 1.5]);
        assert_eq!(parse_snr("3").unwrap(), vec![3.0]);
        assert_eq!(parse_snr("2,4.5,3").unwrap(), vec![2.0, 4.5, 3.0]);
        assert!(parse_snr("1:0:2").is_err());
        assert!(parse_snr("abc").is_err());
    }

    #[test]
    fn rm_dimension_errors_name_the_flag() {
        let mut argv = base_args();
        argv[6] = "5";
        argv[4] = "3";
        let args = Args::try_parse_from(argv).unwrap();
        let err = build_config(args).unwrap_err();
        assert_eq!(err.exit, EXIT_RM_DIMENSION);
        assert!(err.message.contains("--k"), "message: {}", err.message);
    }

    #[test]
    fn oversized_k_is_a_dimension_error() {
        let mut argv = base_args();
        argv[6] = "200";
        argv[4] = "3";
        let args = Args::try_parse_from(argv).unwrap();
        let err = build_config(args).unwrap_err();
        assert_eq!(err.exit, EXIT_DIMENSION);
        assert!(err.message.contains("--k"));
    }

    #[test]
    fn missing_required_flag_is_a_usage_error() {
        let argv = vec!["polarsp", "--code", "rm", "--n", "7"];
        assert!(Args::try_parse_from(argv).is_err());
    }

    #[test]
    fn gnuplot_line_formatting() {
        let config = build_config(Args::try_parse_from(base_args()).unwrap()).unwrap();
        let manifest = RunManifest::new(config);
        let point = FerPoint {
            ebn0_db: 3.0,
            frames: 10000,
            frame_errors: 1311,
            bit_errors: 5000,
            fer: 0.1311,
            ber: 0.008,
            ci95_rel: 0.05,
            elapsed_s: 1.0,
        };
        let text = render_gnuplot(&[point], &manifest);
        let data_line = text.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(data_line, "3.0 0.1311");
        assert!(text.lines().next().unwrap().starts_with("# polarsp"));
    }

    #[test]
    fn render_rejects_empty_point_list() {
        let config = build_config(Args::try_parse_from(base_args()).unwrap()).unwrap();
        let manifest = RunManifest::new(config);
        assert!(render(&[], FormatArg::Csv, &manifest).is_err());
    }

    #[test]
    fn crc_flag_attaches_crc11() {
        let mut argv = base_args();
        argv[2] = "polar";
        argv.extend_from_slice(&["--crc", "11"]);
        let args = Args::try_parse_from(argv).unwrap();
        let cfg = build_config(args).unwrap();
        let crc = cfg.code.crc().unwrap();
        assert_eq!(crc.width, 11);
        assert_eq!(crc.polynomial, 0x621);
        assert_eq!(cfg.code.payload_len(), 53);
    }

    #[test]
    fn ml_bound_needs_a_list_decoder() {
        let mut argv = base_args();
        argv[8] = "sc";
        argv.push("--ml-bound");
        let args = Args::try_parse_from(argv).unwrap();
        let err = build_config(args).unwrap_err();
        assert_eq!(err.exit, EXIT_RANGE);
        assert!(err.message.contains("--ml-bound"));
    }
}
