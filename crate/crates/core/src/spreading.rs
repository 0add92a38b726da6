//! Spreading matrix and the per-block anti-jamming modulation `x = U s`.
//!
//! `U` is `sqrt(N/S)` times the first `S` columns of the unit-normalized
//! N-point DFT matrix, so every symbol is carried on all `N` subcarriers of
//! its block with equal magnitude.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::constellation::Constellation;
use crate::error::{self, Result};

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let data = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| (r, c)))
            .map(|(r, c)| f(r, c))
            .collect();
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `self^H * self`.
    pub fn gram(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.cols, |i, j| {
            (0..self.rows).map(|r| self.get(r, i).conj() * self.get(r, j)).sum()
        })
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Unit-normalized DFT matrix, entry `(k, n) = exp(-j 2 pi k n / N) / sqrt(N)`.
pub fn build_base_unitary(n: usize) -> Result<CMatrix> {
    if n == 0 {
        return error::config("base unitary needs N >= 1");
    }
    let scale = 1.0 / (n as f64).sqrt();
    Ok(CMatrix::from_fn(n, n, |k, m| {
        // reduce kn mod N first to keep the phase argument small
        let phase = -2.0 * PI * ((k * m) % n) as f64 / n as f64;
        Complex64::from_polar(scale, phase)
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpreadingMatrix {
    base: CMatrix,
    matrix: CMatrix,
}

impl SpreadingMatrix {
    pub fn new(n_subcarriers: usize, n_symbols: usize) -> Result<Self> {
        if n_symbols < 1 || n_symbols > n_subcarriers {
            return error::config(format!(
                "spreading needs 1 <= S <= N (got N={n_subcarriers}, S={n_symbols})"
            ));
        }
        let base = build_base_unitary(n_subcarriers)?;
        let scale = (n_subcarriers as f64 / n_symbols as f64).sqrt();
        let matrix = CMatrix::from_fn(n_subcarriers, n_symbols, |r, c| base.get(r, c) * scale);
        Ok(Self { base, matrix })
    }

    pub fn n_subcarriers(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n_symbols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn base(&self) -> &CMatrix {
        &self.base
    }

    /// `U s`.
    pub fn apply(&self, s: &[Complex64]) -> Vec<Complex64> {
        self.matrix.mul_vec(s)
    }
}

pub fn build_spreading(n: usize, s: usize) -> Result<SpreadingMatrix> {
    SpreadingMatrix::new(n, s)
}

/// Modulates one block of `p = S log2(M)` bits; bits fill `s_1` first.
pub fn modulate_block(bits: &[u8], c: &Constellation, sm: &SpreadingMatrix) -> Result<Vec<Complex64>> {
    let p = sm.n_symbols() * c.bits_per_symbol() as usize;
    if bits.len() != p {
        return error::config(format!(
            "block of {} bits does not match S={} symbols of {}-ary modulation (p={p})",
            bits.len(),
            sm.n_symbols(),
            c.order()
        ));
    }
    Ok(sm.apply(&c.bits_to_symbols(bits)?))
}

/// All `M^S` modulated vectors `U s` for one (constellation, spreading) pair.
///
/// Candidate `k` is the symbol vector whose indices are the base-M digits of
/// `k` with `s_1` most significant. Because points are in label order, `k`
/// is also the integer value of the block's `p` bits.
#[derive(Debug, Clone)]
pub struct Codebook {
    constellation: Constellation,
    spreading: SpreadingMatrix,
    vectors: Vec<Complex64>,
}

impl Codebook {
    pub fn new(constellation: Constellation, spreading: SpreadingMatrix) -> Result<Self> {
        let s = spreading.n_symbols();
        let bits = s * constellation.bits_per_symbol() as usize;
        if bits > 24 {
            return error::config(format!(
                "codebook of 2^{bits} candidates is too large to enumerate"
            ));
        }
        let n = spreading.n_subcarriers();
        let size = 1usize << bits;
        let mut vectors = Vec::with_capacity(size * n);
        let mut symbols = vec![Complex64::new(0.0, 0.0); s];
        for k in 0..size {
            for (j, sym) in symbols.iter_mut().enumerate() {
                *sym = constellation.point(Self::digit(&constellation, s, k, j));
            }
            vectors.extend(spreading.apply(&symbols));
        }
        Ok(Self {
            constellation,
            spreading,
            vectors,
        })
    }

    /// Convenience: `M`-ary default alphabet spread onto `N` subcarriers with
    /// `S = p / log2(M)`.
    pub fn for_order(p: usize, n: usize, order: usize) -> Result<Self> {
        let c = Constellation::for_order(order)?;
        let bps = c.bits_per_symbol() as usize;
        if !p.is_multiple_of(bps) {
            return error::config(format!("p={p} bits is not a multiple of log2(M)={bps}"));
        }
        Self::new(c, SpreadingMatrix::new(n, p / bps)?)
    }

    fn digit(c: &Constellation, s: usize, k: usize, j: usize) -> usize {
        let m = c.bits_per_symbol() as usize;
        (k >> (m * (s - 1 - j))) & (c.order() - 1)
    }

    pub fn len(&self) -> usize {
        self.vectors.len() / self.n_subcarriers()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn bits_per_block(&self) -> usize {
        self.spreading.n_symbols() * self.constellation.bits_per_symbol() as usize
    }

    pub fn n_subcarriers(&self) -> usize {
        self.spreading.n_subcarriers()
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn spreading(&self) -> &SpreadingMatrix {
        &self.spreading
    }

    /// Modulated vector `U s_k`.
    pub fn vector(&self, k: usize) -> &[Complex64] {
        let n = self.n_subcarriers();
        &self.vectors[k * n..(k + 1) * n]
    }

    /// Symbol vector of candidate `k`.
    pub fn symbols(&self, k: usize) -> Vec<Complex64> {
        let s = self.spreading.n_symbols();
        (0..s)
            .map(|j| self.constellation.point(Self::digit(&self.constellation, s, k, j)))
            .collect()
    }

    /// Candidate index of a symbol vector of constellation points.
    pub fn index_of(&self, symbols: &[Complex64]) -> Result<usize> {
        if symbols.len() != self.spreading.n_symbols() {
            return error::input(format!(
                "expected {} symbols, got {}",
                self.spreading.n_symbols(),
                symbols.len()
            ));
        }
        let m = self.constellation.bits_per_symbol() as usize;
        symbols.iter().try_fold(0usize, |acc, &z| match self.constellation.index_of(z) {
            Some(i) => Ok((acc << m) | i),
            None => error::input(format!("{z} is not a constellation point")),
        })
    }

    /// Candidate index of a block of bits (big-endian value).
    pub fn index_of_bits(&self, bits: &[u8]) -> usize {
        bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
    }

    /// Appends the `p` bits of candidate `k`.
    pub fn push_bits(&self, k: usize, out: &mut Vec<u8>) {
        let p = self.bits_per_block();
        out.extend((0..p).map(|b| ((k >> (p - 1 - b)) & 1) as u8));
    }
}
