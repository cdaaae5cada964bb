//! Browser bindings for the OFDM PAPR demo page in `www/`.
//!
//! Three interactive views:
//!
//! - `ccdfCurves`: PAPR CCDF before and after clipping for a batch of symbols
//! - `clipTrace`: envelope of one OFDM symbol through the clipping loop
//! - `windowShape`: coefficients of a shaping window
//!
//! The exported functions are thin wrappers; the work happens in plain Rust
//! functions that the native tests call directly.

use ofdm_papr::crest_reduction::{rcf_signal, ClipConfig, ClipStrategy};
use ofdm_papr::experiment::{papr_samples, PaprSummary};
use ofdm_papr::metrics::{default_thresholds_db, estimate_ccdf};
use ofdm_papr::transform::synthesize;
use ofdm_papr::windows::window;
use ofdm_papr::{channel, Constellation, Error, OfdmConfig, RngSeed, WindowKind};
use wasm_bindgen::prelude::*;

/// Hard cap so a slider cannot lock up the tab.
const MAX_SYMBOLS: u32 = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub subcarriers: usize,
    pub mod_order: usize,
    pub oversample: usize,
    pub clip_ratio_db: f64,
    pub iterations: usize,
    pub strategy: ClipStrategy,
    pub window: WindowKind,
    pub window_len: usize,
}

impl Settings {
    #[allow(clippy::too_many_arguments)]
    pub fn parse(
        subcarriers: usize,
        mod_order: usize,
        oversample: usize,
        clip_ratio_db: f64,
        iterations: usize,
        strategy: &str,
        window_name: &str,
        kaiser_beta: f64,
        window_len: usize,
    ) -> Result<Self, Error> {
        let s = Self {
            subcarriers,
            mod_order,
            oversample,
            clip_ratio_db,
            iterations,
            strategy: strategy.parse()?,
            window: WindowKind::parse(window_name, kaiser_beta)?,
            window_len,
        };
        s.ofdm()?;
        s.clip().validate()?;
        Ok(s)
    }

    fn ofdm(&self) -> Result<OfdmConfig, Error> {
        OfdmConfig::new(self.subcarriers, self.oversample, self.mod_order)
    }

    fn clip(&self) -> ClipConfig {
        ClipConfig {
            clip_ratio_db: self.clip_ratio_db,
            iterations: self.iterations,
            strategy: self.strategy,
            window: self.window,
            window_len: self.window_len,
        }
    }
}

#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct CcdfPlot {
    thresholds_db: Vec<f64>,
    unclipped: Vec<f64>,
    clipped: Vec<f64>,
    unclipped_summary: PaprSummary,
    clipped_summary: PaprSummary,
}

#[wasm_bindgen]
impl CcdfPlot {
    #[wasm_bindgen(getter = thresholdsDb)]
    pub fn thresholds_db(&self) -> Vec<f64> {
        self.thresholds_db.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn unclipped(&self) -> Vec<f64> {
        self.unclipped.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn clipped(&self) -> Vec<f64> {
        self.clipped.clone()
    }

    #[wasm_bindgen(getter = unclippedMeanDb)]
    pub fn unclipped_mean_db(&self) -> f64 {
        self.unclipped_summary.mean_papr_db
    }

    #[wasm_bindgen(getter = clippedMeanDb)]
    pub fn clipped_mean_db(&self) -> f64 {
        self.clipped_summary.mean_papr_db
    }

    #[wasm_bindgen(getter = unclippedTailDb)]
    pub fn unclipped_tail_db(&self) -> f64 {
        self.unclipped_summary.ccdf3_papr_db
    }

    #[wasm_bindgen(getter = clippedTailDb)]
    pub fn clipped_tail_db(&self) -> f64 {
        self.clipped_summary.ccdf3_papr_db
    }
}

pub fn compute_ccdf(settings: &Settings, symbols: u32, seed: u64) -> Result<CcdfPlot, Error> {
    let ofdm = settings.ofdm()?;
    let n = u64::from(symbols.clamp(1, MAX_SYMBOLS));
    let seed = RngSeed(seed);
    let before = papr_samples(&ofdm, None, n, seed)?;
    let after = papr_samples(&ofdm, Some(&settings.clip()), n, seed)?;
    let grid = default_thresholds_db();
    Ok(CcdfPlot {
        unclipped: estimate_ccdf(&before, &grid)?.exceed_prob,
        clipped: estimate_ccdf(&after, &grid)?.exceed_prob,
        thresholds_db: grid,
        unclipped_summary: PaprSummary::from_samples(&before)?,
        clipped_summary: PaprSummary::from_samples(&after)?,
    })
}

#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct ClipTrace {
    before: Vec<f64>,
    after: Vec<f64>,
    threshold: f64,
    per_iteration_papr_db: Vec<f64>,
    papr_before_db: f64,
}

#[wasm_bindgen]
impl ClipTrace {
    /// `|x[n]|` of the unprocessed symbol.
    #[wasm_bindgen(getter)]
    pub fn before(&self) -> Vec<f64> {
        self.before.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn after(&self) -> Vec<f64> {
        self.after.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    #[wasm_bindgen(getter = perIterationPaprDb)]
    pub fn per_iteration_papr_db(&self) -> Vec<f64> {
        self.per_iteration_papr_db.clone()
    }

    #[wasm_bindgen(getter = paprBeforeDb)]
    pub fn papr_before_db(&self) -> f64 {
        self.papr_before_db
    }
}

pub fn compute_trace(settings: &Settings, seed: u64) -> Result<ClipTrace, Error> {
    let ofdm = settings.ofdm()?;
    let cons = Constellation::new(ofdm.mod_order)?;
    let mut rng = RngSeed(seed).substream(channel::StreamDomain::Data, 0);
    let (sym, _) = channel::random_symbol(&mut rng, &cons, ofdm.subcarriers)?;
    let x = synthesize(&sym, ofdm.oversample)?;
    let before = x.samples().iter().map(|s| s.norm()).collect();
    let (y, report) = rcf_signal(x, &settings.clip(), &ofdm)?;
    Ok(ClipTrace {
        before,
        after: y.samples().iter().map(|s| s.norm()).collect(),
        threshold: report.threshold,
        per_iteration_papr_db: report.per_iteration_papr_db,
        papr_before_db: report.papr_before_db,
    })
}

fn js_err(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = ccdfCurves)]
#[allow(clippy::too_many_arguments)]
pub fn ccdf_curves(
    subcarriers: usize,
    mod_order: usize,
    oversample: usize,
    clip_ratio_db: f64,
    iterations: usize,
    strategy: &str,
    window_name: &str,
    kaiser_beta: f64,
    window_len: usize,
    symbols: u32,
    seed: u64,
) -> Result<CcdfPlot, JsError> {
    let s = Settings::parse(
        subcarriers,
        mod_order,
        oversample,
        clip_ratio_db,
        iterations,
        strategy,
        window_name,
        kaiser_beta,
        window_len,
    )
    .map_err(js_err)?;
    compute_ccdf(&s, symbols, seed).map_err(js_err)
}

#[wasm_bindgen(js_name = clipTrace)]
#[allow(clippy::too_many_arguments)]
pub fn clip_trace(
    subcarriers: usize,
    mod_order: usize,
    oversample: usize,
    clip_ratio_db: f64,
    iterations: usize,
    strategy: &str,
    window_name: &str,
    kaiser_beta: f64,
    window_len: usize,
    seed: u64,
) -> Result<ClipTrace, JsError> {
    let s = Settings::parse(
        subcarriers,
        mod_order,
        oversample,
        clip_ratio_db,
        iterations,
        strategy,
        window_name,
        kaiser_beta,
        window_len,
    )
    .map_err(js_err)?;
    compute_trace(&s, seed).map_err(js_err)
}

#[wasm_bindgen(js_name = windowShape)]
pub fn window_shape(window_name: &str, len: usize, kaiser_beta: f64) -> Result<Vec<f64>, JsError> {
    let kind = WindowKind::parse(window_name, kaiser_beta).map_err(js_err)?;
    window(kind, len).map_err(js_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults(strategy: &str) -> Settings {
        Settings::parse(64, 8, 4, 3.0, 5, strategy, "kaiser", 5.0, 11).unwrap()
    }

    #[test]
    fn ccdf_plot_shows_reduction() {
        let plot = compute_ccdf(&defaults("cf"), 500, 1).unwrap();
        assert_eq!(plot.thresholds_db.len(), plot.clipped.len());
        assert!(plot.clipped_mean_db() < plot.unclipped_mean_db());
        assert!(plot
            .clipped
            .iter()
            .zip(&plot.unclipped)
            .all(|(c, u)| c <= u));
        assert_eq!(plot, compute_ccdf(&defaults("cf"), 500, 1).unwrap());
    }

    #[test]
    fn trace_respects_threshold_for_hard_clip() {
        let t = compute_trace(&defaults("none"), 3).unwrap();
        assert_eq!(t.before.len(), 256);
        assert!(t.after.iter().all(|&m| m <= t.threshold));
        assert_eq!(t.per_iteration_papr_db.len(), 5);
    }

    #[test]
    fn peak_window_trace_never_amplifies() {
        let t = compute_trace(&defaults("pw"), 4).unwrap();
        assert!(t.after.iter().zip(&t.before).all(|(a, b)| a <= b));
    }

    #[test]
    fn bad_settings_are_rejected() {
        assert!(Settings::parse(64, 8, 4, 3.0, 5, "xx", "kaiser", 5.0, 11).is_err());
        assert!(Settings::parse(60, 8, 4, 3.0, 5, "cf", "kaiser", 5.0, 11).is_err());
        assert!(Settings::parse(64, 8, 4, 3.0, 5, "cf", "hann", 5.0, 12).is_err());
    }

    #[test]
    fn window_coefficients() {
        let w = window(WindowKind::parse("hann", 5.0).unwrap(), 5).unwrap();
        assert_eq!(w.len(), 5);
        assert!((w[2] - 1.0).abs() < 1e-15);
    }
}
