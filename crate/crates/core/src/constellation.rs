//! Unit-energy M-ary constellations with Gray bit labels.
//!
//! Points are stored in label order: `points[i]` carries the `log2(M)`-bit
//! label whose big-endian value is `i`. Detectors therefore work on symbol
//! indices and recover bits (and Hamming distances) with plain integer ops.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{self, Result};

/// Tolerance used when mapping a complex value back onto a constellation point.
const POINT_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstellationKind {
    Psk,
    SquareQam,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    bits_per_symbol: u32,
    kind: ConstellationKind,
    points: Vec<Complex64>,
}

fn gray_to_binary(mut g: usize) -> usize {
    let mut b = 0;
    while g != 0 {
        b ^= g;
        g >>= 1;
    }
    b
}

impl Constellation {
    /// Builds the constellation of order `order` and the given kind.
    ///
    /// `SquareQam` requires an even number of bits per symbol; `order == 2`
    /// is accepted for either kind and yields BPSK.
    pub fn new(order: usize, kind: ConstellationKind) -> Result<Self> {
        if order < 2 || !order.is_power_of_two() {
            return error::config(format!(
                "unsupported constellation (M={order}, {kind:?}): M must be a power of two >= 2"
            ));
        }
        let bits = order.trailing_zeros();
        if bits > 16 {
            return error::config(format!(
                "unsupported constellation (M={order}, {kind:?}): more than 16 bits per symbol"
            ));
        }
        let points = match kind {
            _ if order == 2 => vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
            ConstellationKind::Psk => (0..order)
                .map(|label| {
                    let pos = gray_to_binary(label) as f64;
                    Complex64::from_polar(1.0, 2.0 * PI * pos / order as f64)
                })
                .collect(),
            ConstellationKind::SquareQam => {
                if !bits.is_multiple_of(2) {
                    return error::config(format!(
                        "unsupported constellation (M={order}, {kind:?}): square QAM needs an even bit count"
                    ));
                }
                let half = bits / 2;
                let side = 1usize << half;
                let norm = (2.0 * (order as f64 - 1.0) / 3.0).sqrt();
                let level = |g: usize| (side as f64 - 1.0 - 2.0 * gray_to_binary(g) as f64) / norm;
                (0..order)
                    .map(|label| {
                        let i_bits = label >> half;
                        let q_bits = label & (side - 1);
                        Complex64::new(level(i_bits), level(q_bits))
                    })
                    .collect()
            }
        };
        Ok(Self {
            order,
            bits_per_symbol: bits,
            kind,
            points,
        })
    }

    /// Square QAM for even bit counts, PSK otherwise (BPSK, 8-PSK, 32-PSK, ...).
    pub fn for_order(order: usize) -> Result<Self> {
        if order.is_power_of_two() && order >= 4 && order.trailing_zeros().is_multiple_of(2) {
            Self::new(order, ConstellationKind::SquareQam)
        } else {
            Self::new(order, ConstellationKind::Psk)
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits_per_symbol
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    /// Bit label of point `index`, most significant bit first.
    pub fn label(&self, index: usize) -> Vec<u8> {
        let m = self.bits_per_symbol;
        (0..m).map(|b| ((index >> (m - 1 - b)) & 1) as u8).collect()
    }

    /// Index of the point equal to `z` (within 1e-9), if any.
    pub fn index_of(&self, z: Complex64) -> Option<usize> {
        self.points
            .iter()
            .position(|p| (p - z).norm() <= POINT_MATCH_TOL)
    }

    /// Maps consecutive `log2(M)`-bit groups to point indices.
    pub fn bits_to_indices(&self, bits: &[u8]) -> Result<Vec<usize>> {
        let m = self.bits_per_symbol as usize;
        if !bits.len().is_multiple_of(m) {
            return error::input(format!(
                "{} bits is not a multiple of {m} bits per symbol",
                bits.len()
            ));
        }
        bits.chunks(m)
            .map(|group| {
                group.iter().try_fold(0usize, |acc, &b| match b {
                    0 | 1 => Ok((acc << 1) | b as usize),
                    _ => error::input(format!("bit value {b} is not 0 or 1")),
                })
            })
            .collect()
    }

    pub fn bits_to_symbols(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        Ok(self
            .bits_to_indices(bits)?
            .into_iter()
            .map(|i| self.points[i])
            .collect())
    }

    /// Appends the labels of `indices` to `out`.
    pub fn indices_to_bits(&self, indices: &[usize], out: &mut Vec<u8>) {
        let m = self.bits_per_symbol;
        for &i in indices {
            out.extend((0..m).map(|b| ((i >> (m - 1 - b)) & 1) as u8));
        }
    }

    pub fn symbols_to_bits(&self, symbols: &[Complex64]) -> Result<Vec<u8>> {
        let indices = self.symbols_to_indices(symbols)?;
        let mut bits = Vec::with_capacity(indices.len() * self.bits_per_symbol as usize);
        self.indices_to_bits(&indices, &mut bits);
        Ok(bits)
    }

    fn symbols_to_indices(&self, symbols: &[Complex64]) -> Result<Vec<usize>> {
        symbols
            .iter()
            .map(|&z| match self.index_of(z) {
                Some(i) => Ok(i),
                None => error::input(format!("{z} is not a point of the {}-ary constellation", self.order)),
            })
            .collect()
    }

    /// Number of differing label bits between two equal-length symbol vectors.
    pub fn hamming_distance(&self, s: &[Complex64], s_hat: &[Complex64]) -> Result<u32> {
        if s.len() != s_hat.len() {
            return error::input(format!(
                "symbol vectors differ in length ({} vs {})",
                s.len(),
                s_hat.len()
            ));
        }
        let a = self.symbols_to_indices(s)?;
        let b = self.symbols_to_indices(s_hat)?;
        Ok(a.iter().zip(&b).map(|(x, y)| (x ^ y).count_ones()).sum())
    }
}

pub fn build_constellation(order: usize, kind: ConstellationKind) -> Result<Constellation> {
    Constellation::new(order, kind)
}

pub fn bits_to_symbols(bits: &[u8], c: &Constellation) -> Result<Vec<Complex64>> {
    c.bits_to_symbols(bits)
}

pub fn hamming_distance(s: &[Complex64], s_hat: &[Complex64], c: &Constellation) -> Result<u32> {
    c.hamming_distance(s, s_hat)
}
