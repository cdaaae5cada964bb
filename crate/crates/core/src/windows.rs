//! Window functions for shaping clipping noise.
//!
//! All windows are symmetric (not periodic). For length `W > 1` and
//! `c = 2πn/(W-1)`:
//!
//! - Hanning: `0.5 (1 - cos c)`
//! - Hamming: `0.54 - 0.46 cos c`
//! - Blackman: `0.42 - 0.5 cos c + 0.08 cos 2c`
//! - Kaiser: `I0(β sqrt(1 - (2n/(W-1) - 1)²)) / I0(β)`
//! - Flattop: five-term cosine series, normalized so the peak is 1
//!
//! Length 1 always yields `[1.0]`. Only the first half is evaluated; the rest
//! is mirrored so `w[n] == w[W-1-n]` holds bit for bit.

use crate::error::{Error, Result};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

pub const DEFAULT_KAISER_BETA: f64 = 5.0;

const FLATTOP: [f64; 5] = [
    0.21557895,
    0.41663158,
    0.277263158,
    0.083578947,
    0.006947368,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowKind {
    Rectangular,
    Hanning,
    Hamming,
    Blackman,
    Kaiser { beta: f64 },
    Flattop,
}

impl WindowKind {
    /// The five shaping windows compared in a window sweep, in table order.
    pub fn sweep_set(kaiser_beta: f64) -> [WindowKind; 5] {
        [
            WindowKind::Kaiser { beta: kaiser_beta },
            WindowKind::Blackman,
            WindowKind::Hanning,
            WindowKind::Hamming,
            WindowKind::Flattop,
        ]
    }

    /// CLI name of the window.
    pub fn name(&self) -> &'static str {
        match self {
            WindowKind::Rectangular => "rect",
            WindowKind::Hanning => "hann",
            WindowKind::Hamming => "hamming",
            WindowKind::Blackman => "blackman",
            WindowKind::Kaiser { .. } => "kaiser",
            WindowKind::Flattop => "flattop",
        }
    }

    /// Parses a CLI name; `kaiser` takes the supplied beta.
    pub fn parse(name: &str, kaiser_beta: f64) -> Result<Self> {
        let kind = match name {
            "rect" => WindowKind::Rectangular,
            "hann" => WindowKind::Hanning,
            "hamming" => WindowKind::Hamming,
            "blackman" => WindowKind::Blackman,
            "kaiser" => WindowKind::Kaiser { beta: kaiser_beta },
            "flattop" => WindowKind::Flattop,
            other => {
                return Err(Error::invalid(format!(
                    "unknown window '{other}' (expected rect|hann|hamming|blackman|kaiser|flattop)"
                )))
            }
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn validate(&self) -> Result<()> {
        if let WindowKind::Kaiser { beta } = *self {
            if !beta.is_finite() || beta < 0.0 {
                return Err(Error::invalid(format!(
                    "Kaiser beta must be finite and >= 0, got {beta}"
                )));
            }
        }
        Ok(())
    }

    /// True when every coefficient is in `[0, 1]`.
    pub fn is_non_negative(&self) -> bool {
        !matches!(self, WindowKind::Flattop)
    }
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WindowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        WindowKind::parse(s, DEFAULT_KAISER_BETA)
    }
}

pub fn window(kind: WindowKind, len: usize) -> Result<Vec<f64>> {
    if len < 1 {
        return Err(Error::invalid("window length must be at least 1"));
    }
    kind.validate()?;
    if len == 1 {
        return Ok(vec![1.0]);
    }
    let span = (len - 1) as f64;
    let i0_beta = match kind {
        WindowKind::Kaiser { beta } => bessel_i0(beta)?,
        _ => 1.0,
    };
    let eval = |n: usize| -> f64 {
        let c = 2.0 * PI * n as f64 / span;
        match kind {
            WindowKind::Rectangular => 1.0,
            WindowKind::Hanning => 0.5 * (1.0 - c.cos()),
            WindowKind::Hamming => 0.54 - 0.46 * c.cos(),
            // rounding leaves about -1e-17 at the edges
            WindowKind::Blackman => (0.42 - 0.5 * c.cos() + 0.08 * (2.0 * c).cos()).max(0.0),
            WindowKind::Kaiser { beta } => {
                let r = 2.0 * n as f64 / span - 1.0;
                let arg = beta * (1.0 - r * r).max(0.0).sqrt();
                // |arg| <= beta, so this cannot fail once I0(beta) succeeded
                bessel_i0(arg).unwrap_or(f64::NAN) / i0_beta
            }
            WindowKind::Flattop => FLATTOP
                .iter()
                .enumerate()
                .map(|(k, a)| {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    sign * a * (k as f64 * c).cos()
                })
                .sum(),
        }
    };
    let mut w = vec![0.0; len];
    for n in 0..len.div_ceil(2) {
        let v = eval(n);
        w[n] = v;
        w[len - 1 - n] = v;
    }
    if matches!(kind, WindowKind::Flattop) {
        let peak = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for v in &mut w {
            *v /= peak;
        }
    }
    Ok(w)
}

/// Largest argument accepted by [`bessel_i0`]; `I0(700)` is near `f64::MAX`.
pub const BESSEL_I0_LIMIT: f64 = 700.0;

/// Modified Bessel function of the first kind, order zero.
///
/// Power series `Σ ((x/2)^k / k!)²`. All terms are positive, so the sum is
/// accurate to a few ulps across the accepted range.
pub fn bessel_i0(x: f64) -> Result<f64> {
    if !x.is_finite() || x.abs() >= BESSEL_I0_LIMIT {
        return Err(Error::invalid(format!(
            "bessel_i0 argument {x} outside (-{BESSEL_I0_LIMIT}, {BESSEL_I0_LIMIT})"
        )));
    }
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > sum * 1e-17 {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    Ok(sum)
}
