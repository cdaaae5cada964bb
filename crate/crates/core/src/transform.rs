//! OFDM synthesis and analysis.
//!
//! Both directions use a unitary radix-2 FFT (scaled by `1/sqrt(len)`), so
//! energy is preserved exactly and `analyze` inverts `synthesize`.
//!
//! Oversampling by `L` zero-pads the spectrum in the middle: bins
//! `0..N/2` stay at the low end (positive frequencies), bins `N/2..N` move to
//! the top of the `N*L` grid (negative frequencies), and the `N*(L-1)` bins
//! between them are out of band.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

pub const SUPPORTED_OVERSAMPLING: [usize; 4] = [1, 2, 4, 8];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OfdmConfig {
    pub subcarriers: usize,
    pub oversample: usize,
    pub mod_order: usize,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        Self {
            subcarriers: 64,
            oversample: 4,
            mod_order: 8,
        }
    }
}

impl OfdmConfig {
    pub fn new(subcarriers: usize, oversample: usize, mod_order: usize) -> Result<Self> {
        let cfg = Self {
            subcarriers,
            oversample,
            mod_order,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.subcarriers < 2 || !self.subcarriers.is_power_of_two() {
            return Err(Error::invalid(format!(
                "subcarrier count {} must be a power of two >= 2",
                self.subcarriers
            )));
        }
        if !SUPPORTED_OVERSAMPLING.contains(&self.oversample) {
            return Err(Error::invalid(format!(
                "oversampling factor {} must be one of {SUPPORTED_OVERSAMPLING:?}",
                self.oversample
            )));
        }
        if !crate::modulation::SUPPORTED_ORDERS.contains(&self.mod_order) {
            return Err(Error::invalid(format!(
                "unsupported modulation order {}",
                self.mod_order
            )));
        }
        Ok(())
    }

    /// Samples per oversampled OFDM symbol.
    pub fn signal_len(&self) -> usize {
        self.subcarriers * self.oversample
    }
}

/// One OFDM symbol in the frequency domain, `X_k` for `k = 0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqSymbol {
    bins: Vec<Complex64>,
}

impl FreqSymbol {
    pub fn new(bins: Vec<Complex64>) -> Result<Self> {
        if bins.len() < 2 || !bins.len().is_power_of_two() {
            return Err(Error::invalid(format!(
                "frequency symbol length {} must be a power of two >= 2",
                bins.len()
            )));
        }
        Ok(Self { bins })
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn into_bins(self) -> Vec<Complex64> {
        self.bins
    }
}

/// Oversampled time-domain samples `x[n]`, `n = 0..N*L`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    samples: Vec<Complex64>,
}

impl TimeSignal {
    pub fn new(samples: Vec<Complex64>) -> Self {
        Self { samples }
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }

    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            self.energy() / self.samples.len() as f64
        }
    }

    pub fn peak_magnitude(&self) -> f64 {
        self.samples.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }
}

impl From<Vec<Complex64>> for TimeSignal {
    fn from(samples: Vec<Complex64>) -> Self {
        Self::new(samples)
    }
}

/// Precomputed tables for one power-of-two transform size.
#[derive(Debug)]
pub struct FftPlan {
    len: usize,
    /// `exp(-2πi k / len)` for `k < len/2`, each evaluated directly.
    twiddles: Vec<Complex64>,
    bit_reverse: Vec<usize>,
    scale: f64,
}

impl FftPlan {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::invalid(format!(
                "transform length {len} is not a power of two"
            )));
        }
        let bits = len.trailing_zeros();
        let bit_reverse = (0..len)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (usize::BITS - bits)
                }
            })
            .collect();
        let twiddles = (0..len / 2)
            .map(|k| {
                let (s, c) = (-2.0 * PI * k as f64 / len as f64).sin_cos();
                Complex64::new(c, s)
            })
            .collect();
        Ok(Self {
            len,
            twiddles,
            bit_reverse,
            scale: (len as f64).sqrt().recip(),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place unitary forward transform: `X[k] = len^-1/2 Σ x[n] e^{-j2πkn/len}`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, false);
    }

    /// In-place unitary inverse transform.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, true);
    }

    fn run(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.len, "buffer length does not match plan");
        let n = self.len;
        for i in 0..n {
            let j = self.bit_reverse[i];
            if i < j {
                data.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
        for v in data.iter_mut() {
            *v *= self.scale;
        }
    }
}

thread_local! {
    static PLANS: RefCell<HashMap<usize, Arc<FftPlan>>> = RefCell::new(HashMap::new());
}

/// Shared plan for `len`, built once per thread.
pub fn plan(len: usize) -> Result<Arc<FftPlan>> {
    PLANS.with(|cache| {
        if let Some(p) = cache.borrow().get(&len) {
            return Ok(Arc::clone(p));
        }
        let p = Arc::new(FftPlan::new(len)?);
        cache.borrow_mut().insert(len, Arc::clone(&p));
        Ok(p)
    })
}

/// Places `N` subcarrier bins onto the `N*L` grid.
pub fn zero_pad_spectrum(bins: &[Complex64], oversample: usize) -> Result<Vec<Complex64>> {
    let n = bins.len();
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::invalid(format!(
            "subcarrier count {n} must be a power of two >= 2"
        )));
    }
    if oversample == 0 || !oversample.is_power_of_two() {
        return Err(Error::invalid(format!(
            "oversampling factor {oversample} must be a power of two"
        )));
    }
    let total = n * oversample;
    let mut spectrum = vec![Complex64::new(0.0, 0.0); total];
    spectrum[..n / 2].copy_from_slice(&bins[..n / 2]);
    spectrum[total - n / 2..].copy_from_slice(&bins[n / 2..]);
    Ok(spectrum)
}

/// Inverse of [`zero_pad_spectrum`]: picks the `N` in-band bins.
pub fn extract_in_band(spectrum: &[Complex64], subcarriers: usize) -> Result<Vec<Complex64>> {
    let total = spectrum.len();
    if subcarriers < 2 || !subcarriers.is_power_of_two() || !total.is_multiple_of(subcarriers) {
        return Err(Error::invalid(format!(
            "cannot extract {subcarriers} in-band bins from a spectrum of {total}"
        )));
    }
    let mut bins = Vec::with_capacity(subcarriers);
    bins.extend_from_slice(&spectrum[..subcarriers / 2]);
    bins.extend_from_slice(&spectrum[total - subcarriers / 2..]);
    Ok(bins)
}

/// Oversampled OFDM synthesis. `Σ|x[n]|² = Σ|X_k|²`.
pub fn synthesize(sym: &FreqSymbol, oversample: usize) -> Result<TimeSignal> {
    let mut buf = zero_pad_spectrum(sym.bins(), oversample)?;
    plan(buf.len())?.inverse(&mut buf);
    Ok(TimeSignal::new(buf))
}

/// Forward transform of a full oversampled signal, length `N*L`.
pub fn analyze(sig: &TimeSignal) -> Result<Vec<Complex64>> {
    let mut buf = sig.samples().to_vec();
    plan(buf.len())?.forward(&mut buf);
    Ok(buf)
}

/// Inverse of [`analyze`] on the full grid.
pub fn analyze_inverse(spectrum: &[Complex64]) -> Result<TimeSignal> {
    let mut buf = spectrum.to_vec();
    plan(buf.len())?.inverse(&mut buf);
    Ok(TimeSignal::new(buf))
}
