//! Experiment runners that turn a configuration and a seed into CSV.
//!
//! Every runner is a pure function of its inputs: symbol `i` always draws
//! from substream `i` of the seed, and results are gathered in index order.

use crate::channel::{measure_ser, random_symbol, ser_csv, RngSeed, SerPoint, StreamDomain};
use crate::crest_reduction::{rcf_signal, ClipConfig, ClipStrategy};
use crate::error::{Error, Result};
use crate::metrics::{
    default_thresholds_db, estimate_ccdf, mean, papr_at_exceedance, papr_db, CcdfCurve,
    SUMMARY_EXCEEDANCE,
};
use crate::modulation::Constellation;
use crate::parallel::map_indices;
use crate::transform::{synthesize, OfdmConfig};
use crate::windows::WindowKind;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Ccdf,
    Ser,
    WindowSweep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub command: Command,
    pub ofdm: OfdmConfig,
    pub clip: ClipConfig,
    pub snr_grid_db: Vec<f64>,
    pub thresholds_db: Vec<f64>,
    pub n_symbols: u64,
    pub seed: RngSeed,
}

impl ExperimentSpec {
    pub fn new(command: Command) -> Self {
        let mut clip = ClipConfig::default();
        if command == Command::WindowSweep {
            clip.strategy = ClipStrategy::PeakWindow;
        }
        Self {
            command,
            ofdm: OfdmConfig::default(),
            clip,
            snr_grid_db: (0..=10).map(|i| 2.0 * i as f64).collect(),
            thresholds_db: default_thresholds_db(),
            n_symbols: 10_000,
            seed: RngSeed(1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ofdm.validate()?;
        self.clip.validate()?;
        if self.n_symbols == 0 {
            return Err(Error::invalid("symbol count must be at least 1"));
        }
        let ascending = |g: &[f64]| !g.is_empty() && g.windows(2).all(|w| w[0] < w[1]);
        match self.command {
            Command::Ser if !ascending(&self.snr_grid_db) => {
                Err(Error::invalid("SNR grid must be non-empty and ascending"))
            }
            Command::Ccdf if !ascending(&self.thresholds_db) => Err(Error::invalid(
                "threshold grid must be non-empty and ascending",
            )),
            Command::WindowSweep if self.clip.strategy != ClipStrategy::PeakWindow => Err(
                Error::invalid("window sweep requires the peak-window strategy (pw)"),
            ),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub csv: String,
    pub summary: String,
}

pub fn execute(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    match spec.command {
        Command::Ccdf => {
            let run = run_ccdf(
                &spec.ofdm,
                &spec.clip,
                spec.n_symbols,
                spec.seed,
                &spec.thresholds_db,
            )?;
            Ok(ExperimentOutput {
                csv: run.curve.to_csv(),
                summary: format!(
                    "mean PAPR {:.4} dB, PAPR at CCDF 1e-3 {:.4} dB ({} symbols)",
                    run.mean_papr_db, run.ccdf3_papr_db, run.curve.n_samples
                ),
            })
        }
        Command::Ser => {
            let points = run_ser(
                &spec.ofdm,
                &spec.clip,
                &spec.snr_grid_db,
                spec.n_symbols,
                spec.seed,
            )?;
            let sent = points.first().map_or(0, |p| p.symbols_sent);
            Ok(ExperimentOutput {
                csv: ser_csv(&points),
                summary: format!(
                    "{} SNR points, {} constellation symbols each",
                    points.len(),
                    sent
                ),
            })
        }
        Command::WindowSweep => {
            let sweep = run_window_sweep(&spec.ofdm, &spec.clip, spec.n_symbols, spec.seed)?;
            Ok(ExperimentOutput {
                csv: sweep.to_csv(),
                summary: format!(
                    "unclipped: mean PAPR {:.4} dB, PAPR at CCDF 1e-3 {:.4} dB",
                    sweep.unclipped.mean_papr_db, sweep.unclipped.ccdf3_papr_db
                ),
            })
        }
    }
}

/// PAPR of `n_symbols` random OFDM symbols after `clip` (in symbol order).
pub fn papr_samples(
    ofdm: &OfdmConfig,
    clip: Option<&ClipConfig>,
    n_symbols: u64,
    seed: RngSeed,
) -> Result<Vec<f64>> {
    ofdm.validate()?;
    let cons = Constellation::new(ofdm.mod_order)?;
    map_indices(n_symbols, |i| {
        let mut rng = seed.substream(StreamDomain::Data, i);
        let (sym, _) = random_symbol(&mut rng, &cons, ofdm.subcarriers)?;
        let x = synthesize(&sym, ofdm.oversample)?;
        match clip {
            Some(cfg) => Ok(rcf_signal(x, cfg, ofdm)?.1.papr_after_db),
            None => papr_db(&x),
        }
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaprSummary {
    pub mean_papr_db: f64,
    /// PAPR exceeded with probability 1e-3.
    pub ccdf3_papr_db: f64,
}

impl PaprSummary {
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        Ok(Self {
            mean_papr_db: mean(samples),
            ccdf3_papr_db: papr_at_exceedance(samples, SUMMARY_EXCEEDANCE)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcdfRun {
    pub curve: CcdfCurve,
    pub mean_papr_db: f64,
    pub ccdf3_papr_db: f64,
}

pub fn run_ccdf(
    ofdm: &OfdmConfig,
    clip: &ClipConfig,
    n_symbols: u64,
    seed: RngSeed,
    thresholds_db: &[f64],
) -> Result<CcdfRun> {
    clip.validate()?;
    let samples = papr_samples(ofdm, Some(clip), n_symbols, seed)?;
    let summary = PaprSummary::from_samples(&samples)?;
    Ok(CcdfRun {
        curve: estimate_ccdf(&samples, thresholds_db)?,
        mean_papr_db: summary.mean_papr_db,
        ccdf3_papr_db: summary.ccdf3_papr_db,
    })
}

pub fn run_ser(
    ofdm: &OfdmConfig,
    clip: &ClipConfig,
    snr_grid_db: &[f64],
    n_symbols: u64,
    seed: RngSeed,
) -> Result<Vec<SerPoint>> {
    if snr_grid_db.is_empty() {
        return Err(Error::invalid("SNR grid is empty"));
    }
    snr_grid_db
        .iter()
        .map(|&snr| measure_ser(ofdm, Some(clip), snr, n_symbols, seed))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowRow {
    pub window: WindowKind,
    pub summary: PaprSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowSweep {
    pub rows: Vec<WindowRow>,
    pub unclipped: PaprSummary,
}

impl WindowSweep {
    /// `window,mean_papr_db,ccdf3_papr_db` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("window,mean_papr_db,ccdf3_papr_db\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.6},{:.6}",
                r.window, r.summary.mean_papr_db, r.summary.ccdf3_papr_db
            );
        }
        out
    }
}

/// Runs the same symbol stream through each of the five shaping windows.
/// The Kaiser entry uses the beta from `clip.window` when it is Kaiser.
pub fn run_window_sweep(
    ofdm: &OfdmConfig,
    clip: &ClipConfig,
    n_symbols: u64,
    seed: RngSeed,
) -> Result<WindowSweep> {
    clip.validate()?;
    let beta = match clip.window {
        WindowKind::Kaiser { beta } => beta,
        _ => crate::windows::DEFAULT_KAISER_BETA,
    };
    let unclipped = PaprSummary::from_samples(&papr_samples(ofdm, None, n_symbols, seed)?)?;
    let rows = WindowKind::sweep_set(beta)
        .into_iter()
        .map(|window| {
            let cfg = ClipConfig {
                strategy: ClipStrategy::PeakWindow,
                window,
                ..*clip
            };
            let samples = papr_samples(ofdm, Some(&cfg), n_symbols, seed)?;
            Ok(WindowRow {
                window,
                summary: PaprSummary::from_samples(&samples)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WindowSweep { rows, unclipped })
}
