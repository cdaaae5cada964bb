//! Clipping-based crest factor reduction.
//!
//! Three building blocks and the loop that combines them:
//!
//! - [`clip`]: hard amplitude limiting at `A` with the phase kept
//! - [`oob_filter`]: projection onto the `N` in-band subcarrier bins
//! - [`peak_window_suppress`]: smooth attenuation envelope built from a
//!   window centred on every peak above `A`
//! - [`rcf`]: recursive clipping and filtering, `K` passes with a fixed `A`
//!
//! The threshold `A` is always derived from the unprocessed signal:
//! `A = rms(x0) * 10^(CR/20)`.

use crate::error::{Error, Result};
use crate::metrics::papr_db;
use crate::transform::{analyze, extract_in_band, synthesize, FreqSymbol, OfdmConfig, TimeSignal};
use crate::windows::{window, WindowKind, DEFAULT_KAISER_BETA};
use num_complex::Complex64;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClipStrategy {
    /// Clip only; out-of-band products are left in place.
    HardClipOnly,
    /// Clip, then zero every out-of-band bin.
    ClipAndFilter,
    /// Replace the clip with windowed peak attenuation.
    PeakWindow,
}

impl ClipStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            ClipStrategy::HardClipOnly => "none",
            ClipStrategy::ClipAndFilter => "cf",
            ClipStrategy::PeakWindow => "pw",
        }
    }
}

impl fmt::Display for ClipStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClipStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(ClipStrategy::HardClipOnly),
            "cf" => Ok(ClipStrategy::ClipAndFilter),
            "pw" => Ok(ClipStrategy::PeakWindow),
            other => Err(Error::invalid(format!(
                "unknown clipping strategy '{other}' (expected none|cf|pw)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipConfig {
    /// Threshold over RMS, in dB.
    pub clip_ratio_db: f64,
    pub iterations: usize,
    pub strategy: ClipStrategy,
    pub window: WindowKind,
    /// Odd window length in samples.
    pub window_len: usize,
}

impl Default for ClipConfig {
    fn default() -> Self {
        Self {
            clip_ratio_db: 3.0,
            iterations: 5,
            strategy: ClipStrategy::ClipAndFilter,
            window: WindowKind::Kaiser {
                beta: DEFAULT_KAISER_BETA,
            },
            window_len: 11,
        }
    }
}

impl ClipConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.clip_ratio_db.is_finite() {
            return Err(Error::invalid(format!(
                "clipping ratio {} dB is not finite",
                self.clip_ratio_db
            )));
        }
        if self.window_len == 0 || self.window_len.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "window length {} must be odd",
                self.window_len
            )));
        }
        self.window.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClipReport {
    pub papr_before_db: f64,
    pub papr_after_db: f64,
    pub threshold: f64,
    /// Samples above `A` seen by the clip (or peak-window) step, summed over
    /// iterations.
    pub clipped_sample_count: usize,
    /// PAPR after each iteration; a single entry equal to the input PAPR
    /// when no iteration runs.
    pub per_iteration_papr_db: Vec<f64>,
}

pub fn threshold_from_ratio(sig: &TimeSignal, clip_ratio_db: f64) -> Result<f64> {
    if !clip_ratio_db.is_finite() {
        return Err(Error::invalid("clipping ratio must be finite"));
    }
    let power = sig.mean_power();
    if power <= 0.0 {
        return Err(Error::invalid(
            "cannot derive a threshold from an all-zero signal",
        ));
    }
    Ok(power.sqrt() * 10f64.powf(clip_ratio_db / 20.0))
}

fn check_threshold(a: f64) -> Result<()> {
    if a.is_finite() && a > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "clipping threshold {a} must be positive"
        )))
    }
}

fn clip_in_place(samples: &mut [Complex64], a: f64) -> usize {
    let mut count = 0;
    for s in samples {
        let mag = s.norm();
        if mag > a {
            *s = scale_to_at_most(*s, mag, a);
            count += 1;
        }
    }
    count
}

/// Scales `s` (with `|s| = mag > a`) onto the circle of radius `a`, never
/// landing outside it after rounding.
fn scale_to_at_most(s: Complex64, mag: f64, a: f64) -> Complex64 {
    let mut k = a / mag;
    loop {
        let y = s * k;
        if y.norm() <= a {
            return y;
        }
        k = k.next_down();
    }
}

/// Hard limiter: `|y| = min(|x|, A)`, phase unchanged.
pub fn clip(sig: &TimeSignal, a: f64) -> Result<TimeSignal> {
    check_threshold(a)?;
    let mut out = sig.clone();
    clip_in_place(out.samples_mut(), a);
    Ok(out)
}

/// Keeps only the `N` in-band bins of an `N*L` signal.
pub fn oob_filter(sig: &TimeSignal, subcarriers: usize, oversample: usize) -> Result<TimeSignal> {
    if subcarriers == 0 || sig.len() != subcarriers * oversample {
        return Err(Error::invalid(format!(
            "signal length {} does not match {subcarriers} subcarriers x {oversample}",
            sig.len()
        )));
    }
    let spectrum = analyze(sig)?;
    let in_band = FreqSymbol::new(extract_in_band(&spectrum, subcarriers)?)?;
    synthesize(&in_band, oversample)
}

/// Indices of local maxima of `mag` strictly above `a`.
///
/// A sample is a local maximum when it exceeds its left neighbour and the
/// next sample with a different value (if any) is smaller. On a plateau only
/// the first sample counts. The edges have one neighbour.
fn peaks_above(mag: &[f64], a: f64) -> Vec<usize> {
    let mut peaks = Vec::new();
    let n = mag.len();
    let mut i = 0;
    while i < n {
        let v = mag[i];
        let mut end = i + 1;
        while end < n && mag[end] == v {
            end += 1;
        }
        let left_ok = i == 0 || mag[i - 1] < v;
        let right_ok = end == n || mag[end] < v;
        if v > a && left_ok && right_ok {
            peaks.push(i);
        }
        i = end;
    }
    peaks
}

/// Peak windowing.
///
/// Each local maximum `n_i` above `A` contributes `α_i w(n - n_i)` to an
/// envelope `b[n]`, with depth `α_i = 1 - A/|x[n_i]|` and `w` the length-`W`
/// window centred on the peak. The output is `x[n] (1 - min(b[n], 1))`, so an
/// isolated peak lands exactly on `A`.
pub fn peak_window_suppress(
    sig: &TimeSignal,
    a: f64,
    kind: WindowKind,
    window_len: usize,
) -> Result<TimeSignal> {
    peak_window_with_count(sig, a, kind, window_len).map(|(y, _)| y)
}

fn peak_window_with_count(
    sig: &TimeSignal,
    a: f64,
    kind: WindowKind,
    window_len: usize,
) -> Result<(TimeSignal, usize)> {
    check_threshold(a)?;
    if window_len.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "peak window length {window_len} must be odd"
        )));
    }
    let w = window(kind, window_len)?;
    let samples = sig.samples();
    let mag: Vec<f64> = samples.iter().map(|s| s.norm()).collect();
    let above = mag.iter().filter(|&&m| m > a).count();
    let peaks = peaks_above(&mag, a);
    if peaks.is_empty() {
        return Ok((sig.clone(), above));
    }
    let half = window_len / 2;
    let n = samples.len();
    let mut envelope = vec![0.0; n];
    for &p in &peaks {
        let depth = 1.0 - a / mag[p];
        let lo = p.saturating_sub(half);
        let hi = (p + half).min(n - 1);
        for (idx, e) in envelope.iter_mut().enumerate().take(hi + 1).skip(lo) {
            *e += depth * w[idx + half - p];
        }
    }
    let out = samples
        .iter()
        .zip(&envelope)
        .map(|(&s, &b)| if b == 0.0 { s } else { s * (1.0 - b.min(1.0)) })
        .collect();
    Ok((TimeSignal::new(out), above))
}

/// Recursive clipping and filtering of one OFDM symbol.
pub fn rcf(
    sym: &FreqSymbol,
    cfg: &ClipConfig,
    ofdm: &OfdmConfig,
) -> Result<(TimeSignal, ClipReport)> {
    cfg.validate()?;
    if sym.len() != ofdm.subcarriers {
        return Err(Error::invalid(format!(
            "symbol has {} bins but the configuration has {} subcarriers",
            sym.len(),
            ofdm.subcarriers
        )));
    }
    let x0 = synthesize(sym, ofdm.oversample)?;
    rcf_signal(x0, cfg, ofdm)
}

/// [`rcf`] starting from an already synthesized signal.
pub fn rcf_signal(
    x0: TimeSignal,
    cfg: &ClipConfig,
    ofdm: &OfdmConfig,
) -> Result<(TimeSignal, ClipReport)> {
    cfg.validate()?;
    let papr_before_db = papr_db(&x0)?;
    let a = threshold_from_ratio(&x0, cfg.clip_ratio_db)?;
    let mut x = x0;
    let mut clipped = 0;
    let mut per_iteration = Vec::with_capacity(cfg.iterations.max(1));
    for _ in 0..cfg.iterations {
        x = match cfg.strategy {
            ClipStrategy::HardClipOnly => {
                clipped += clip_in_place(x.samples_mut(), a);
                x
            }
            ClipStrategy::ClipAndFilter => {
                clipped += clip_in_place(x.samples_mut(), a);
                oob_filter(&x, ofdm.subcarriers, ofdm.oversample)?
            }
            ClipStrategy::PeakWindow => {
                let (y, n) = peak_window_with_count(&x, a, cfg.window, cfg.window_len)?;
                clipped += n;
                y
            }
        };
        per_iteration.push(papr_db(&x)?);
    }
    if per_iteration.is_empty() {
        per_iteration.push(papr_before_db);
    }
    let report = ClipReport {
        papr_before_db,
        papr_after_db: *per_iteration.last().expect("non-empty"),
        threshold: a,
        clipped_sample_count: clipped,
        per_iteration_papr_db: per_iteration,
    };
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulation::Constellation;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_4;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_symbol(ofdm: &OfdmConfig, seed: u64) -> FreqSymbol {
        let cons = Constellation::new(ofdm.mod_order).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        FreqSymbol::new(
            (0..ofdm.subcarriers)
                .map(|_| cons.point(rng.random_range(0..ofdm.mod_order)))
                .collect(),
        )
        .unwrap()
    }

    fn out_of_band_fraction(sig: &TimeSignal, n: usize) -> f64 {
        let spec = analyze(sig).unwrap();
        let total: f64 = spec.iter().map(|s| s.norm_sqr()).sum();
        let oob: f64 = spec[n / 2..spec.len() - n / 2]
            .iter()
            .map(|s| s.norm_sqr())
            .sum();
        oob / total
    }

    #[test]
    fn threshold_examples() {
        let unit = TimeSignal::new(vec![c(1.0, 0.0), c(0.0, -1.0), c(-1.0, 0.0), c(0.0, 1.0)]);
        assert!((threshold_from_ratio(&unit, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let a = threshold_from_ratio(&unit, 20.0 * 2f64.log10()).unwrap();
        assert!((a - 2.0).abs() < 1e-12);
        let ofdm = OfdmConfig::default();
        let x = synthesize(&random_symbol(&ofdm, 1), 4).unwrap();
        let scaled = TimeSignal::new(x.samples().iter().map(|s| s * 3.5).collect());
        let a1 = threshold_from_ratio(&x, 3.0).unwrap();
        let a2 = threshold_from_ratio(&scaled, 3.0).unwrap();
        assert!((a2 / a1 - 3.5).abs() < 1e-12);
        assert!(threshold_from_ratio(&TimeSignal::new(vec![c(0.0, 0.0); 8]), 3.0).is_err());
    }

    #[test]
    fn clip_examples() {
        let x = TimeSignal::new(vec![Complex64::from_polar(2.0, FRAC_PI_4), c(0.5, 0.0)]);
        let y = clip(&x, 1.0).unwrap();
        assert!((y.samples()[0] - Complex64::from_polar(1.0, FRAC_PI_4)).norm() < 1e-15);
        assert_eq!(y.samples()[1], c(0.5, 0.0));
        assert_eq!(clip(&y, 1.0).unwrap(), y);
        assert!(clip(&x, 0.0).is_err());
        assert!(clip(&x, -1.0).is_err());
    }

    #[test]
    fn filter_fixes_band_limited_signals() {
        let ofdm = OfdmConfig::default();
        let x = synthesize(&random_symbol(&ofdm, 2), ofdm.oversample).unwrap();
        let y = oob_filter(&x, ofdm.subcarriers, ofdm.oversample).unwrap();
        for (a, b) in x.samples().iter().zip(y.samples()) {
            assert!((a - b).norm() < 1e-10);
        }
        assert!(oob_filter(&x, 32, 4).is_err());
    }

    #[test]
    fn filter_is_a_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (n, l) = (32, 4);
        let rand_sig = |rng: &mut ChaCha8Rng| {
            TimeSignal::new(
                (0..n * l)
                    .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect(),
            )
        };
        let x = rand_sig(&mut rng);
        let z = rand_sig(&mut rng);
        let fx = oob_filter(&x, n, l).unwrap();
        assert!(fx.energy() <= x.energy());
        let ffx = oob_filter(&fx, n, l).unwrap();
        for (a, b) in fx.samples().iter().zip(ffx.samples()) {
            assert!((a - b).norm() < 1e-10);
        }
        assert!(out_of_band_fraction(&fx, n) < 1e-24);
        let (p, q) = (c(0.7, 0.2), c(-1.5, 0.4));
        let mix = TimeSignal::new(
            x.samples()
                .iter()
                .zip(z.samples())
                .map(|(u, v)| p * u + q * v)
                .collect(),
        );
        let fz = oob_filter(&z, n, l).unwrap();
        let fmix = oob_filter(&mix, n, l).unwrap();
        for ((m, u), v) in fmix.samples().iter().zip(fx.samples()).zip(fz.samples()) {
            assert!((m - (p * u + q * v)).norm() < 1e-10);
        }
    }

    #[test]
    fn peak_detection_rules() {
        assert_eq!(
            peaks_above(&[3.0, 1.0, 2.0, 2.0, 0.5, 4.0], 1.5),
            vec![0, 2, 5]
        );
        // plateau that keeps rising is not a peak
        assert_eq!(peaks_above(&[1.0, 2.0, 2.0, 3.0, 1.0], 1.5), vec![3]);
        assert_eq!(peaks_above(&[1.0, 1.0, 1.0], 0.5), vec![0]);
        assert!(peaks_above(&[1.0, 1.0], 1.0).is_empty());
    }

    #[test]
    fn peak_window_passes_quiet_signals() {
        let x = TimeSignal::new(vec![c(0.3, 0.1), c(-0.2, 0.5), c(0.0, 0.0)]);
        let y = peak_window_suppress(&x, 1.0, WindowKind::Hanning, 5).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn isolated_peak_lands_on_threshold() {
        let mut samples: Vec<Complex64> = (0..64)
            .map(|i| Complex64::from_polar(0.4 + 0.1 * ((i as f64) * 0.3).sin(), i as f64))
            .collect();
        samples[30] = Complex64::from_polar(2.7, 1.1);
        let x = TimeSignal::new(samples);
        let a = 1.0;
        for kind in [
            WindowKind::Rectangular,
            WindowKind::Hanning,
            WindowKind::Hamming,
            WindowKind::Blackman,
            WindowKind::Kaiser { beta: 5.0 },
            WindowKind::Flattop,
        ] {
            for len in [1, 5, 11, 31] {
                let y = peak_window_suppress(&x, a, kind, len).unwrap();
                assert!((y.samples()[30].norm() - a).abs() < 1e-12, "{kind} W={len}");
                assert!((y.samples()[30].arg() - 1.1).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unit_rect_window_matches_clip_at_peaks() {
        let ofdm = OfdmConfig::default();
        let x = synthesize(&random_symbol(&ofdm, 5), ofdm.oversample).unwrap();
        let a = threshold_from_ratio(&x, 3.0).unwrap();
        let y = peak_window_suppress(&x, a, WindowKind::Rectangular, 1).unwrap();
        let clipped = clip(&x, a).unwrap();
        let mag: Vec<f64> = x.samples().iter().map(|s| s.norm()).collect();
        let peaks = peaks_above(&mag, a);
        assert!(!peaks.is_empty());
        for i in 0..x.len() {
            if peaks.contains(&i) {
                assert!((y.samples()[i] - clipped.samples()[i]).norm() < 1e-12);
            } else {
                assert_eq!(y.samples()[i], x.samples()[i]);
            }
        }
    }

    #[test]
    fn peak_window_rejects_bad_args() {
        let x = TimeSignal::new(vec![c(1.0, 0.0); 8]);
        assert!(peak_window_suppress(&x, 0.0, WindowKind::Hanning, 5).is_err());
        assert!(peak_window_suppress(&x, 1.0, WindowKind::Hanning, 4).is_err());
    }

    #[test]
    fn rcf_zero_iterations_is_identity() {
        let ofdm = OfdmConfig::default();
        let sym = random_symbol(&ofdm, 6);
        let cfg = ClipConfig {
            iterations: 0,
            ..ClipConfig::default()
        };
        let (y, report) = rcf(&sym, &cfg, &ofdm).unwrap();
        assert_eq!(y, synthesize(&sym, ofdm.oversample).unwrap());
        assert_eq!(report.papr_before_db, report.papr_after_db);
        assert_eq!(report.per_iteration_papr_db, vec![report.papr_before_db]);
        assert_eq!(report.clipped_sample_count, 0);
    }

    #[test]
    fn rcf_hard_clip_caps_magnitude() {
        let ofdm = OfdmConfig::default();
        let cfg = ClipConfig {
            iterations: 1,
            strategy: ClipStrategy::HardClipOnly,
            ..ClipConfig::default()
        };
        for seed in 0..20 {
            let (y, report) = rcf(&random_symbol(&ofdm, seed), &cfg, &ofdm).unwrap();
            assert!(y.peak_magnitude() <= report.threshold);
            assert_eq!(report.per_iteration_papr_db.len(), 1);
        }
    }

    #[test]
    fn rcf_filter_leaves_no_out_of_band_power() {
        let ofdm = OfdmConfig::default();
        let cfg = ClipConfig::default();
        let (y, report) = rcf(&random_symbol(&ofdm, 8), &cfg, &ofdm).unwrap();
        assert!(out_of_band_fraction(&y, ofdm.subcarriers) <= 1e-12);
        assert_eq!(report.per_iteration_papr_db.len(), 5);
        assert!(report.clipped_sample_count > 0);
        assert!(report.papr_after_db < report.papr_before_db);
    }

    #[test]
    fn filtering_regrows_peaks() {
        let ofdm = OfdmConfig::new(64, 4, 4).unwrap();
        let found = (0..200).any(|seed| {
            let x = synthesize(&random_symbol(&ofdm, seed), ofdm.oversample).unwrap();
            let a = threshold_from_ratio(&x, 3.0).unwrap();
            let filtered = oob_filter(&clip(&x, a).unwrap(), 64, 4).unwrap();
            filtered.peak_magnitude() > a * (1.0 + 1e-9)
        });
        assert!(found, "expected at least one regrown peak");
    }

    #[test]
    fn rcf_checks_config() {
        let ofdm = OfdmConfig::default();
        let sym = random_symbol(&ofdm, 1);
        let even = ClipConfig {
            window_len: 10,
            ..ClipConfig::default()
        };
        assert!(rcf(&sym, &even, &ofdm).is_err());
        let inf = ClipConfig {
            clip_ratio_db: f64::NAN,
            ..ClipConfig::default()
        };
        assert!(rcf(&sym, &inf, &ofdm).is_err());
        let wrong = OfdmConfig::new(32, 4, 8).unwrap();
        assert!(rcf(&sym, &ClipConfig::default(), &wrong).is_err());
    }

    proptest! {
        #[test]
        fn clip_postconditions(
            pts in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..200),
            a in 0.05f64..4.0,
        ) {
            let x = TimeSignal::new(pts.iter().map(|&(r, i)| c(r, i)).collect());
            let y = clip(&x, a).unwrap();
            for (s, t) in x.samples().iter().zip(y.samples()) {
                prop_assert!(t.norm() <= a * (1.0 + 1e-15));
                if s.norm() <= a {
                    prop_assert_eq!(s, t);
                } else {
                    prop_assert!((s.arg() - t.arg()).abs() < 1e-12);
                }
            }
            prop_assert_eq!(clip(&y, a).unwrap(), y);
        }

        #[test]
        fn peak_window_never_amplifies(
            seed in any::<u64>(),
            cr in 0.0f64..6.0,
            kind_idx in 0usize..5,
            half in 0usize..10,
        ) {
            let kinds = [
                WindowKind::Rectangular,
                WindowKind::Hanning,
                WindowKind::Hamming,
                WindowKind::Blackman,
                WindowKind::Kaiser { beta: 5.0 },
            ];
            let ofdm = OfdmConfig::default();
            let x = synthesize(&random_symbol(&ofdm, seed), ofdm.oversample).unwrap();
            let a = threshold_from_ratio(&x, cr).unwrap();
            let y = peak_window_suppress(&x, a, kinds[kind_idx], 2 * half + 1).unwrap();
            for (s, t) in x.samples().iter().zip(y.samples()) {
                prop_assert!(t.norm() <= s.norm());
            }
        }
    }
}
