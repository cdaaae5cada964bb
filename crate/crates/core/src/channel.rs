//! AWGN channel and end-to-end symbol error rate measurement.
//!
//! SNR is the ratio of mean signal power to noise power at the channel
//! input, referred to the occupied band. At `L = 1` that is the plain
//! per-sample ratio; with oversampling the per-sample noise variance is
//! raised by `L` because only `1/L` of the noise lands in band. Either way
//! the SNR equals `Es/N0` on each subcarrier after the unitary FFT.

use crate::crest_reduction::{rcf_signal, ClipConfig};
use crate::error::{Error, Result};
use crate::modulation::Constellation;
use crate::parallel::map_indices;
use crate::transform::{analyze, extract_in_band, synthesize, FreqSymbol, OfdmConfig, TimeSignal};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::fmt::Write as _;

/// Root seed of every random quantity in a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RngSeed(pub u64);

/// Independent families of substreams drawn from one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamDomain {
    Data = 1,
    Noise = 2,
}

impl RngSeed {
    /// ChaCha8 keyed by `(seed, domain)` and positioned on stream `index`.
    pub fn substream(self, domain: StreamDomain, index: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.0.to_le_bytes());
        key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index);
        rng
    }
}

/// Uniform random bits, one per byte.
pub fn random_bits<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<u8> {
    let mut bits = Vec::with_capacity(count);
    while bits.len() < count {
        let word: u64 = rng.random();
        let take = (count - bits.len()).min(64);
        bits.extend((0..take).map(|i| ((word >> i) & 1) as u8));
    }
    bits
}

/// Draws random bits for one OFDM symbol and maps them onto the subcarriers.
/// Returns the symbol and the transmitted labels.
pub fn random_symbol<R: Rng + ?Sized>(
    rng: &mut R,
    cons: &Constellation,
    subcarriers: usize,
) -> Result<(FreqSymbol, Vec<usize>)> {
    let bits = random_bits(rng, subcarriers * cons.bits_per_symbol());
    let labels = bits
        .chunks(cons.bits_per_symbol())
        .map(|g| cons.label_from_bits(g))
        .collect::<Result<Vec<_>>>()?;
    let sym = FreqSymbol::new(cons.map(&bits)?)?;
    Ok((sym, labels))
}

/// Adds circular complex Gaussian noise with per-sample variance
/// `mean|x|² / 10^(snr_db/10)`. `snr_db = +inf` returns the input unchanged.
pub fn awgn(sig: &TimeSignal, snr_db: f64, seed: RngSeed, stream: u64) -> Result<TimeSignal> {
    let power = sig.mean_power();
    if !(power > 0.0) {
        return Err(Error::invalid("cannot scale noise to an all-zero signal"));
    }
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::invalid(format!("SNR {snr_db} dB is not usable")));
    }
    if snr_db == f64::INFINITY {
        return Ok(sig.clone());
    }
    let variance = power / 10f64.powf(snr_db / 10.0);
    let sigma = (variance / 2.0).sqrt();
    let mut rng = seed.substream(StreamDomain::Noise, stream);
    let noisy = sig
        .samples()
        .iter()
        .map(|&s| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            s + Complex64::new(re, im) * sigma
        })
        .collect();
    Ok(TimeSignal::new(noisy))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerPoint {
    pub snr_db: f64,
    pub symbols_sent: u64,
    pub symbol_errors: u64,
    pub ser: f64,
}

impl SerPoint {
    pub fn new(snr_db: f64, symbols_sent: u64, symbol_errors: u64) -> Self {
        Self {
            snr_db,
            symbols_sent,
            symbol_errors,
            ser: symbol_errors as f64 / symbols_sent as f64,
        }
    }
}

/// `snr_db,symbols,errors,ser` CSV.
pub fn ser_csv(points: &[SerPoint]) -> String {
    let mut out = String::from("snr_db,symbols,errors,ser\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{:.6e}",
            p.snr_db, p.symbols_sent, p.symbol_errors, p.ser
        );
    }
    out
}

fn symbol_errors(
    ofdm: &OfdmConfig,
    cons: &Constellation,
    clip: Option<&ClipConfig>,
    snr_db: f64,
    seed: RngSeed,
    index: u64,
) -> Result<u64> {
    let mut rng = seed.substream(StreamDomain::Data, index);
    let (sym, labels) = random_symbol(&mut rng, cons, ofdm.subcarriers)?;
    let mut tx = synthesize(&sym, ofdm.oversample)?;
    if let Some(cfg) = clip {
        tx = rcf_signal(tx, cfg, ofdm)?.0;
    }
    let sample_snr_db = snr_db - 10.0 * (ofdm.oversample as f64).log10();
    let rx = awgn(&tx, sample_snr_db, seed, index)?;
    let bins = extract_in_band(&analyze(&rx)?, ofdm.subcarriers)?;
    Ok(bins
        .iter()
        .zip(&labels)
        .filter(|(b, &l)| cons.nearest(**b) != l)
        .count() as u64)
}

/// Monte Carlo SER over `n_symbols` OFDM symbols (`n_symbols * N`
/// constellation symbols). Pure in `(ofdm, clip, snr_db, n_symbols, seed)`.
pub fn measure_ser(
    ofdm: &OfdmConfig,
    clip: Option<&ClipConfig>,
    snr_db: f64,
    n_symbols: u64,
    seed: RngSeed,
) -> Result<SerPoint> {
    ofdm.validate()?;
    if let Some(cfg) = clip {
        cfg.validate()?;
    }
    if n_symbols == 0 {
        return Err(Error::invalid("need at least one OFDM symbol"));
    }
    let cons = Constellation::new(ofdm.mod_order)?;
    let counts = map_indices(n_symbols, |i| {
        symbol_errors(ofdm, &cons, clip, snr_db, seed, i)
    });
    let mut errors = 0u64;
    for c in counts {
        errors += c?;
    }
    Ok(SerPoint::new(
        snr_db,
        n_symbols * ofdm.subcarriers as u64,
        errors,
    ))
}
