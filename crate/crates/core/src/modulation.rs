//! Gray-coded constellations and hard-decision demapping.
//!
//! Layouts:
//!
//! | M  | shape                          | scale  |
//! |----|--------------------------------|--------|
//! | 2  | BPSK `{+1, -1}`                | 1      |
//! | 4  | square 2x2, `(±1 ± j)`         | 1/√2   |
//! | 8  | rectangular 4x2, `{±1,±3}x{±1}` | 1/√6   |
//! | 16 | square 4x4                     | 1/√10  |
//! | 64 | square 8x8                     | 1/√42  |
//!
//! A symbol's label is its `log2(M)` bits read most-significant first. The
//! leading bits select the in-phase level and the trailing bits the
//! quadrature level, each through a reflected Gray code. Gray code 0 sits at
//! the most positive level, so label 0 is always the upper-right corner
//! (`+1` for BPSK).

use crate::error::{Error, Result};
use num_complex::Complex64;

pub const SUPPORTED_ORDERS: [usize; 5] = [2, 4, 8, 16, 64];

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    bits_per_symbol: usize,
    /// `points[label]` is the point carrying bit label `label`.
    points: Vec<Complex64>,
}

fn gray_decode(mut g: usize) -> usize {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

/// Amplitude of the axis level whose Gray label is `label`, on an unscaled
/// `{±1, ±3, ...}` grid with `levels` entries, most positive first.
fn axis_level(label: usize, levels: usize) -> f64 {
    if levels == 1 {
        return 0.0;
    }
    let position = gray_decode(label);
    (levels as f64 - 1.0) - 2.0 * position as f64
}

impl Constellation {
    pub fn new(order: usize) -> Result<Self> {
        let (i_bits, q_bits) = match order {
            2 => (1, 0),
            4 => (1, 1),
            8 => (2, 1),
            16 => (2, 2),
            64 => (3, 3),
            _ => {
                return Err(Error::invalid(format!(
                    "unsupported modulation order {order}; expected one of {SUPPORTED_ORDERS:?}"
                )))
            }
        };
        let i_levels = 1usize << i_bits;
        let q_levels = 1usize << q_bits;
        let raw: Vec<Complex64> = (0..order)
            .map(|label| {
                let i_label = label >> q_bits;
                let q_label = label & (q_levels - 1);
                Complex64::new(axis_level(i_label, i_levels), axis_level(q_label, q_levels))
            })
            .collect();
        let mean_energy = raw.iter().map(|p| p.norm_sqr()).sum::<f64>() / order as f64;
        let scale = mean_energy.sqrt().recip();
        Ok(Self {
            order,
            bits_per_symbol: i_bits + q_bits,
            points: raw.into_iter().map(|p| p * scale).collect(),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    /// Points indexed by bit label.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    /// Label of the nearest point. Ties go to the lowest label.
    pub fn nearest(&self, received: Complex64) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (label, p) in self.points.iter().enumerate() {
            let d = (received - p).norm_sqr();
            if d < best_dist {
                best_dist = d;
                best = label;
            }
        }
        best
    }

    /// Packs one group of MSB-first bits into a label.
    pub fn label_from_bits(&self, group: &[u8]) -> Result<usize> {
        if group.len() != self.bits_per_symbol {
            return Err(Error::invalid(format!(
                "bit group has {} bits, expected {}",
                group.len(),
                self.bits_per_symbol
            )));
        }
        group.iter().try_fold(0usize, |acc, &b| match b {
            0 | 1 => Ok((acc << 1) | b as usize),
            _ => Err(Error::invalid(format!("bit value {b} is not 0 or 1"))),
        })
    }

    pub fn push_label_bits(&self, label: usize, out: &mut Vec<u8>) {
        for shift in (0..self.bits_per_symbol).rev() {
            out.push(((label >> shift) & 1) as u8);
        }
    }

    pub fn map(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        if !bits.len().is_multiple_of(self.bits_per_symbol) {
            return Err(Error::invalid(format!(
                "{} bits is not a multiple of {} bits per symbol",
                bits.len(),
                self.bits_per_symbol
            )));
        }
        bits.chunks(self.bits_per_symbol)
            .map(|group| self.label_from_bits(group).map(|l| self.points[l]))
            .collect()
    }

    pub fn demap(&self, received: &[Complex64]) -> Vec<u8> {
        let mut bits = Vec::with_capacity(received.len() * self.bits_per_symbol);
        for &r in received {
            self.push_label_bits(self.nearest(r), &mut bits);
        }
        bits
    }
}

pub fn constellation(order: usize) -> Result<Constellation> {
    Constellation::new(order)
}

pub fn map_bits(bits: &[u8], order: usize) -> Result<Vec<Complex64>> {
    Constellation::new(order)?.map(bits)
}

pub fn demap_points(received: &[Complex64], order: usize) -> Result<Vec<u8>> {
    Ok(Constellation::new(order)?.demap(received))
}
