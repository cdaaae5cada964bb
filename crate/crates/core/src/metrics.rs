//! PAPR and CCDF estimation.

use crate::error::{Error, Result};
use crate::transform::TimeSignal;
use std::fmt::Write as _;

/// Exceedance probability used for single-number PAPR summaries.
pub const SUMMARY_EXCEEDANCE: f64 = 1e-3;

/// Peak-to-average power ratio in dB.
pub fn papr_db(sig: &TimeSignal) -> Result<f64> {
    let mean = sig.mean_power();
    if !(mean > 0.0) {
        return Err(Error::invalid("PAPR is undefined for an all-zero signal"));
    }
    let peak = sig
        .samples()
        .iter()
        .map(|s| s.norm_sqr())
        .fold(0.0, f64::max);
    Ok(10.0 * (peak / mean).log10())
}

/// Default threshold grid: 4.0 to 13.0 dB in 0.25 dB steps.
pub fn default_thresholds_db() -> Vec<f64> {
    linear_grid(4.0, 13.0, 0.25)
}

/// Inclusive arithmetic grid; values are `start + i*step` so there is no
/// accumulated drift.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || stop < start {
        return Vec::new();
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| start + i as f64 * step).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcdfCurve {
    pub thresholds_db: Vec<f64>,
    pub exceed_prob: Vec<f64>,
    pub n_samples: usize,
}

impl CcdfCurve {
    /// `threshold_db,ccdf` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold_db,ccdf\n");
        for (t, p) in self.thresholds_db.iter().zip(&self.exceed_prob) {
            let _ = writeln!(out, "{t:.2},{p:.6e}");
        }
        out
    }
}

/// Fraction of samples strictly above each threshold.
pub fn estimate_ccdf(papr_samples: &[f64], thresholds_db: &[f64]) -> Result<CcdfCurve> {
    if papr_samples.is_empty() {
        return Err(Error::invalid("CCDF needs at least one PAPR sample"));
    }
    if papr_samples.iter().any(|v| v.is_nan()) {
        return Err(Error::Numeric("PAPR samples contain NaN".into()));
    }
    if thresholds_db.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("thresholds must be strictly ascending"));
    }
    let mut sorted = papr_samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let exceed_prob = thresholds_db
        .iter()
        .map(|&t| {
            let at_or_below = sorted.partition_point(|&v| v <= t);
            (n - at_or_below) as f64 / n as f64
        })
        .collect();
    Ok(CcdfCurve {
        thresholds_db: thresholds_db.to_vec(),
        exceed_prob,
        n_samples: n,
    })
}

/// Smallest sample value `t` with at most `floor(n * prob)` samples above it.
pub fn papr_at_exceedance(papr_samples: &[f64], prob: f64) -> Result<f64> {
    if papr_samples.is_empty() {
        return Err(Error::invalid("need at least one PAPR sample"));
    }
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::invalid(format!(
            "exceedance probability {prob} not in [0, 1]"
        )));
    }
    let mut sorted = papr_samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let allowed = ((n as f64 * prob).floor() as usize).min(n - 1);
    Ok(sorted[n - 1 - allowed])
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::{synthesize, FreqSymbol};
    use num_complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn constant_envelope_is_zero_db() {
        let x = TimeSignal::new(
            (0..16)
                .map(|i| Complex64::from_polar(2.0, i as f64))
                .collect(),
        );
        assert!(papr_db(&x).unwrap().abs() < 1e-12);
    }

    #[test]
    fn impulse_papr() {
        let sym = FreqSymbol::new(vec![Complex64::new(1.0, 0.0); 64]).unwrap();
        let x = synthesize(&sym, 1).unwrap();
        assert!((papr_db(&x).unwrap() - 10.0 * 64f64.log10()).abs() < 1e-9);
        assert!((papr_db(&x).unwrap() - 18.0618).abs() < 1e-4);
    }

    #[test]
    fn zero_signal_rejected() {
        assert!(papr_db(&TimeSignal::new(vec![Complex64::new(0.0, 0.0); 4])).is_err());
        assert!(estimate_ccdf(&[], &[1.0]).is_err());
        assert!(estimate_ccdf(&[1.0], &[2.0, 1.0]).is_err());
    }

    #[test]
    fn ccdf_endpoints_and_counts() {
        let samples = [5.0, 6.0, 6.0, 7.5, 9.0];
        let c = estimate_ccdf(&samples, &[1.0, 5.0, 6.0, 7.0, 9.0, 20.0]).unwrap();
        assert_eq!(c.exceed_prob, vec![1.0, 0.8, 0.4, 0.4, 0.0, 0.0]);
        assert_eq!(c.n_samples, 5);
    }

    #[test]
    fn exceedance_point() {
        let samples: Vec<f64> = (0..10_000).map(|i| i as f64).collect();
        let t = papr_at_exceedance(&samples, 1e-3).unwrap();
        assert_eq!(t, 9989.0);
        assert_eq!(samples.iter().filter(|&&v| v > t).count(), 10);
        assert_eq!(papr_at_exceedance(&[3.0], 1e-3).unwrap(), 3.0);
    }

    #[test]
    fn grid() {
        let g = default_thresholds_db();
        assert_eq!(g.len(), 37);
        assert_eq!(g[0], 4.0);
        assert_eq!(*g.last().unwrap(), 13.0);
        assert!(linear_grid(2.0, 1.0, 0.5).is_empty());
        assert!(linear_grid(0.0, 1.0, 0.0).is_empty());
    }

    #[test]
    fn csv_layout() {
        let c = estimate_ccdf(&[5.0, 7.0], &[4.0, 6.0]).unwrap();
        assert_eq!(
            c.to_csv(),
            "threshold_db,ccdf\n4.00,1.000000e0\n6.00,5.000000e-1\n"
        );
    }

    proptest! {
        #[test]
        fn ccdf_matches_brute_force(
            samples in proptest::collection::vec(0.0f64..15.0, 1..300),
        ) {
            let grid = default_thresholds_db();
            let c = estimate_ccdf(&samples, &grid).unwrap();
            for (t, p) in grid.iter().zip(&c.exceed_prob) {
                let count = samples.iter().filter(|&&v| v > *t).count();
                prop_assert_eq!(*p, count as f64 / samples.len() as f64);
            }
            prop_assert!(c.exceed_prob.windows(2).all(|w| w[1] <= w[0]));
        }

        #[test]
        fn papr_is_scale_invariant_and_bounded(
            pts in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..128),
            scale in 1e-3f64..1e3,
        ) {
            let x = TimeSignal::new(pts.iter().map(|&(r, i)| Complex64::new(r, i)).collect());
            prop_assume!(x.mean_power() > 1e-9);
            let p = papr_db(&x).unwrap();
            let y = TimeSignal::new(x.samples().iter().map(|s| s * scale).collect());
            prop_assert!((papr_db(&y).unwrap() - p).abs() < 1e-12);
            prop_assert!(p >= 0.0);
            prop_assert!(p <= 10.0 * (x.len() as f64).log10() + 1e-12);
        }
    }
}
