//! `ofdm-papr`: PAPR CCDF, SER and window-sweep experiments as CSV.
//!
//! Exit codes: 0 success, 2 usage error, 3 I/O error, 4 numeric failure.

use clap::{Args, Parser, Subcommand};
use ofdm_papr::crest_reduction::{ClipConfig, ClipStrategy};
use ofdm_papr::experiment::{execute, Command, ExperimentSpec};
use ofdm_papr::metrics::linear_grid;
use ofdm_papr::{Error, OfdmConfig, RngSeed, WindowKind};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "ofdm-papr", version, about = "OFDM PAPR reduction experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// PAPR CCDF after clipping (`threshold_db,ccdf`).
    Ccdf(CommonArgs),
    /// Symbol error rate over AWGN (`snr_db,symbols,errors,ser`).
    Ser(CommonArgs),
    /// PAPR for each shaping window (`window,mean_papr_db,ccdf3_papr_db`).
    WindowSweep(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Number of subcarriers (power of two).
    #[arg(long = "n", env = "OFDM_PAPR_N", default_value_t = 64)]
    subcarriers: usize,
    /// Modulation order: 2, 4, 8, 16 or 64.
    #[arg(long = "mod", env = "OFDM_PAPR_MOD", default_value_t = 8)]
    mod_order: usize,
    /// Oversampling factor: 1, 2, 4 or 8.
    #[arg(long, env = "OFDM_PAPR_OVERSAMPLE", default_value_t = 4)]
    oversample: usize,
    /// Clipping threshold over RMS in dB.
    #[arg(
        long,
        env = "OFDM_PAPR_CR_DB",
        default_value_t = 3.0,
        allow_negative_numbers = true
    )]
    cr_db: f64,
    /// Clip iterations; 0 leaves the signal untouched.
    #[arg(long, env = "OFDM_PAPR_ITERATIONS", default_value_t = 5)]
    iterations: usize,
    /// none = hard clip only, cf = clip and filter, pw = peak windowing.
    /// Defaults to cf, or pw for window-sweep.
    #[arg(long, env = "OFDM_PAPR_CLIP", value_parser = ["none", "cf", "pw"])]
    clip: Option<String>,
    #[arg(
        long,
        env = "OFDM_PAPR_WINDOW",
        default_value = "kaiser",
        value_parser = ["rect", "hann", "hamming", "blackman", "kaiser", "flattop"]
    )]
    window: String,
    #[arg(long, env = "OFDM_PAPR_KAISER_BETA", default_value_t = 5.0)]
    kaiser_beta: f64,
    /// Peak window length in samples (odd).
    #[arg(long, env = "OFDM_PAPR_WINDOW_LEN", default_value_t = 11)]
    window_len: usize,
    #[arg(
        long,
        env = "OFDM_PAPR_SNR_START",
        default_value_t = 0.0,
        allow_negative_numbers = true
    )]
    snr_start: f64,
    #[arg(
        long,
        env = "OFDM_PAPR_SNR_STOP",
        default_value_t = 20.0,
        allow_negative_numbers = true
    )]
    snr_stop: f64,
    #[arg(
        long,
        env = "OFDM_PAPR_SNR_STEP",
        default_value_t = 2.0,
        allow_negative_numbers = true
    )]
    snr_step: f64,
    /// OFDM symbols per run (per SNR point for ser).
    #[arg(long, env = "OFDM_PAPR_SYMBOLS", default_value_t = 10_000)]
    symbols: u64,
    #[arg(long, env = "OFDM_PAPR_SEED", default_value_t = 1)]
    seed: u64,
    /// Output CSV path; stdout when omitted.
    #[arg(long, env = "OFDM_PAPR_OUT")]
    out: Option<PathBuf>,
    /// Worker threads; output does not depend on this.
    #[arg(long, env = "OFDM_PAPR_THREADS")]
    threads: Option<usize>,
}

impl CommonArgs {
    fn to_spec(&self, command: Command) -> Result<ExperimentSpec, Error> {
        let default_strategy = match command {
            Command::WindowSweep => "pw",
            _ => "cf",
        };
        let strategy: ClipStrategy = self.clip.as_deref().unwrap_or(default_strategy).parse()?;
        let window = WindowKind::parse(&self.window, self.kaiser_beta)?;
        let mut spec = ExperimentSpec::new(command);
        spec.ofdm = OfdmConfig::new(self.subcarriers, self.oversample, self.mod_order)?;
        spec.clip = ClipConfig {
            clip_ratio_db: self.cr_db,
            iterations: self.iterations,
            strategy,
            window,
            window_len: self.window_len,
        };
        spec.snr_grid_db = linear_grid(self.snr_start, self.snr_stop, self.snr_step);
        spec.n_symbols = self.symbols;
        spec.seed = RngSeed(self.seed);
        spec.validate()?;
        Ok(spec)
    }
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    eprintln!("run `ofdm-papr --help` for usage");
    ExitCode::from(EXIT_USAGE)
}

/// Writes via a temporary file in the target directory so a failed run
/// never leaves a partial CSV behind.
fn write_output(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        Cmd::Ccdf(a) => (Command::Ccdf, a),
        Cmd::Ser(a) => (Command::Ser, a),
        Cmd::WindowSweep(a) => (Command::WindowSweep, a),
    };
    let spec = match args.to_spec(command) {
        Ok(s) => s,
        Err(e) => return usage_error(e),
    };
    if let Some(n) = args.threads {
        if n == 0 {
            return usage_error("--threads must be at least 1");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: could not start thread pool: {e}");
            return ExitCode::from(EXIT_NUMERIC);
        }
    }
    let output = match execute(&spec) {
        Ok(o) => o,
        Err(Error::InvalidArgument(msg)) => return usage_error(msg),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_NUMERIC);
        }
    };
    match &args.out {
        Some(path) => {
            if let Err(e) = write_output(path, &output.csv) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_IO);
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            if let Err(e) = stdout
                .write_all(output.csv.as_bytes())
                .and_then(|_| stdout.flush())
            {
                eprintln!("error: cannot write to stdout: {e}");
                return ExitCode::from(EXIT_IO);
            }
        }
    }
    eprintln!("{}", output.summary);
    ExitCode::SUCCESS
}
