//! Baseband OFDM simulation for peak-to-average power ratio (PAPR) reduction.
//!
//! The crate covers the whole transmit/receive chain used to study
//! clipping-based crest factor reduction:
//!
//! - [`modulation`]: Gray-coded BPSK/QPSK/QAM mapping and hard-decision demapping
//! - [`transform`]: oversampled OFDM synthesis and the matching forward FFT
//! - [`windows`]: the window functions used to shape clipping noise
//! - [`crest_reduction`]: hard clipping, out-of-band filtering, peak windowing
//!   and the recursive clip-and-filter loop
//! - [`metrics`]: PAPR and Monte Carlo CCDF estimation
//! - [`channel`]: AWGN and end-to-end symbol error rate measurement
//! - [`experiment`]: the CSV-producing experiment runners behind the CLI
//!
//! All randomness flows from an explicit [`RngSeed`] through per-symbol
//! substreams, so every result is reproducible and independent of how work
//! is scheduled across threads.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod crest_reduction;
mod error;
pub mod experiment;
pub mod metrics;
pub mod modulation;
mod parallel;
pub mod transform;
pub mod windows;

pub use channel::{awgn, measure_ser, RngSeed, SerPoint};
pub use crest_reduction::{ClipConfig, ClipReport, ClipStrategy};
pub use error::{Error, Result};
pub use metrics::{estimate_ccdf, papr_db, CcdfCurve};
pub use modulation::Constellation;
pub use transform::{FreqSymbol, OfdmConfig, TimeSignal};
pub use windows::WindowKind;

pub use num_complex::Complex64;
