//! Frame assembly: system dimensions, the cross-block interleaver and the
//! DFT / cyclic-prefix utilities of the transmit chain.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{self, Result};

/// Dimensioning and power parameters of one link.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Subcarriers per OFDM symbol.
    pub k: usize,
    /// Subcarriers per block.
    pub n: usize,
    /// Number of blocks, `ceil(K / N)`.
    pub g: usize,
    /// Bits per block.
    pub p: usize,
    /// Symbols per block.
    pub s: usize,
    /// Modulation order.
    pub m: usize,
    /// OFDM symbols per coherence block.
    pub t: usize,
    /// Length of the noncoherent (estimation) phase.
    pub t_e: usize,
    pub sigma_w2: f64,
    pub sigma_z2: f64,
    pub cp_len: usize,
}

impl SystemConfig {
    /// Builds a configuration with `S = p / log2(M)`, `G = ceil(K/N)` and a
    /// cyclic prefix of `K/8`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        k: usize,
        n: usize,
        p: usize,
        m: usize,
        t: usize,
        t_e: usize,
        sigma_w2: f64,
        sigma_z2: f64,
    ) -> Result<Self> {
        if !m.is_power_of_two() || m < 2 {
            return error::config(format!("modulation order M={m} is not a power of two >= 2"));
        }
        let bps = m.trailing_zeros() as usize;
        if !p.is_multiple_of(bps) {
            return error::config(format!("p={p} is not a multiple of log2(M)={bps}"));
        }
        if n == 0 {
            return error::config("block size N must be >= 1");
        }
        let cfg = Self {
            k,
            n,
            g: k.div_ceil(n),
            p,
            s: p / bps,
            m,
            t,
            t_e,
            sigma_w2,
            sigma_z2,
            cp_len: k / 8,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n == 0 || self.n > self.k {
            return error::config(format!("need 1 <= N <= K (K={}, N={})", self.k, self.n));
        }
        if self.g * self.n < self.k || (self.g - 1) * self.n >= self.k {
            return error::config(format!("G={} is not ceil(K/N)", self.g));
        }
        if !self.m.is_power_of_two() || self.m < 2 || self.s * self.m.trailing_zeros() as usize != self.p {
            return error::config(format!(
                "p={} != S*log2(M) with S={}, M={}",
                self.p, self.s, self.m
            ));
        }
        if self.t_e > self.t {
            return error::config(format!("T_e={} exceeds T={}", self.t_e, self.t));
        }
        if !(self.sigma_w2 > 0.0 && self.sigma_w2.is_finite()) {
            return error::config(format!("noise variance must be positive, got {}", self.sigma_w2));
        }
        if !(self.sigma_z2 >= 0.0 && self.sigma_z2.is_finite()) {
            return error::config(format!("jamming variance must be >= 0, got {}", self.sigma_z2));
        }
        Ok(())
    }

    /// Data bits per OFDM symbol, `m = p G`.
    pub fn bits_per_symbol(&self) -> usize {
        self.p * self.g
    }
}

/// Frequency-domain OFDM symbol of `K` subcarrier values.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyFrame {
    pub values: Vec<Complex64>,
}

impl FrequencyFrame {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn zeros(k: usize) -> Self {
        Self {
            values: vec![Complex64::new(0.0, 0.0); k],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Stride-G block interleaver over `G` blocks of `N` entries.
///
/// Entry `n` of block `g` sits at stride position `n G + g`. When `G N > K`
/// the last `G N - K` entries of the final block are padding; they are
/// dropped and the remaining stride positions are compacted onto
/// `0..K` in order, so a run of fewer than `G` contiguous subcarriers never
/// hits the same block twice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    k: usize,
    n: usize,
    g: usize,
    /// Physical subcarrier of logical entry `g N + n`; `None` for padding.
    to_subcarrier: Vec<Option<usize>>,
    /// Logical entry carried by each subcarrier.
    to_entry: Vec<usize>,
}

impl Interleaver {
    pub fn new(k: usize, n: usize) -> Result<Self> {
        if k == 0 || n == 0 {
            return error::config(format!("interleaver needs K, N >= 1 (K={k}, N={n})"));
        }
        let g = k.div_ceil(n);
        let last_len = k - (g - 1) * n;
        let mut to_subcarrier = vec![None; g * n];
        let mut to_entry = Vec::with_capacity(k);
        for q in 0..g * n {
            let (block, pos) = (q % g, q / g);
            if block == g - 1 && pos >= last_len {
                continue;
            }
            to_subcarrier[block * n + pos] = Some(to_entry.len());
            to_entry.push(block * n + pos);
        }
        debug_assert_eq!(to_entry.len(), k);
        Ok(Self {
            k,
            n,
            g,
            to_subcarrier,
            to_entry,
        })
    }

    pub fn for_config(cfg: &SystemConfig) -> Result<Self> {
        Self::new(cfg.k, cfg.n)
    }

    pub fn n_subcarriers(&self) -> usize {
        self.k
    }

    pub fn block_size(&self) -> usize {
        self.n
    }

    pub fn n_blocks(&self) -> usize {
        self.g
    }

    /// Non-padded entries of block `g`; only the final block can be short.
    pub fn block_len(&self, g: usize) -> usize {
        if g + 1 == self.g {
            self.k - (self.g - 1) * self.n
        } else {
            self.n
        }
    }

    /// Subcarrier carrying entry `pos` of block `block`, or `None` for padding.
    pub fn subcarrier(&self, block: usize, pos: usize) -> Option<usize> {
        self.to_subcarrier[block * self.n + pos]
    }

    /// `(block, position)` carried by subcarrier `k`.
    pub fn entry(&self, k: usize) -> (usize, usize) {
        let e = self.to_entry[k];
        (e / self.n, e % self.n)
    }

    /// Interleaves block-major `blocks` (length `G N`) into `out` (length `K`).
    pub fn interleave_into(&self, blocks: &[Complex64], out: &mut [Complex64]) {
        for (k, v) in out.iter_mut().enumerate() {
            *v = blocks[self.to_entry[k]];
        }
    }

    /// Inverse of [`Self::interleave_into`]; padded entries are set to zero.
    pub fn deinterleave_into(&self, frame: &[Complex64], blocks: &mut [Complex64]) {
        blocks.fill(Complex64::new(0.0, 0.0));
        for (k, v) in frame.iter().enumerate() {
            blocks[self.to_entry[k]] = *v;
        }
    }

    pub fn interleave(&self, blocks: &[Vec<Complex64>]) -> Result<FrequencyFrame> {
        if blocks.len() != self.g || blocks.iter().any(|b| b.len() != self.n) {
            return error::input(format!(
                "expected {} blocks of length {}, got {} blocks",
                self.g,
                self.n,
                blocks.len()
            ));
        }
        let flat: Vec<Complex64> = blocks.iter().flatten().copied().collect();
        let mut frame = FrequencyFrame::zeros(self.k);
        self.interleave_into(&flat, &mut frame.values);
        Ok(frame)
    }

    pub fn deinterleave(&self, frame: &FrequencyFrame) -> Result<Vec<Vec<Complex64>>> {
        if frame.len() != self.k {
            return error::input(format!("frame length {} != K={}", frame.len(), self.k));
        }
        let mut flat = vec![Complex64::new(0.0, 0.0); self.g * self.n];
        self.deinterleave_into(&frame.values, &mut flat);
        Ok(flat.chunks(self.n).map(<[Complex64]>::to_vec).collect())
    }
}

pub fn interleave(blocks: &[Vec<Complex64>], k: usize) -> Result<FrequencyFrame> {
    let n = blocks.first().map_or(0, Vec::len);
    Interleaver::new(k, n)?.interleave(blocks)
}

pub fn deinterleave(frame: &FrequencyFrame, cfg: &SystemConfig) -> Result<Vec<Vec<Complex64>>> {
    if frame.len() != cfg.k {
        return error::input(format!("frame length {} != K={}", frame.len(), cfg.k));
    }
    Interleaver::for_config(cfg)?.deinterleave(frame)
}

/// K-point unitary DFT pair: `x_t = W_K^H x_f / sqrt(K)` and its inverse.
pub struct OfdmTransform {
    k: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for OfdmTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OfdmTransform").field("k", &self.k).finish()
    }
}

impl OfdmTransform {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return error::config("DFT size must be >= 1");
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            k,
            forward: planner.plan_fft_forward(k),
            inverse: planner.plan_fft_inverse(k),
        })
    }

    pub fn to_time_domain(&self, frame: &FrequencyFrame) -> Result<Vec<Complex64>> {
        if frame.len() != self.k {
            return error::input(format!("frame length {} != K={}", frame.len(), self.k));
        }
        let mut buf = frame.values.clone();
        self.inverse.process(&mut buf);
        let scale = 1.0 / (self.k as f64).sqrt();
        buf.iter_mut().for_each(|v| *v *= scale);
        Ok(buf)
    }

    pub fn from_time_domain(&self, x: &[Complex64]) -> Result<FrequencyFrame> {
        if x.len() != self.k {
            return error::input(format!("time-domain length {} != K={}", x.len(), self.k));
        }
        let mut buf = x.to_vec();
        self.forward.process(&mut buf);
        let scale = 1.0 / (self.k as f64).sqrt();
        buf.iter_mut().for_each(|v| *v *= scale);
        Ok(FrequencyFrame::new(buf))
    }
}

pub fn to_time_domain(frame: &FrequencyFrame) -> Result<Vec<Complex64>> {
    OfdmTransform::new(frame.len())?.to_time_domain(frame)
}

pub fn from_time_domain(x: &[Complex64]) -> Result<FrequencyFrame> {
    OfdmTransform::new(x.len())?.from_time_domain(x)
}

/// Prepends the last `cp_len` samples.
pub fn add_cyclic_prefix(x: &[Complex64], cp_len: usize) -> Result<Vec<Complex64>> {
    if cp_len > x.len() {
        return error::input(format!("cyclic prefix {cp_len} longer than symbol {}", x.len()));
    }
    let mut out = Vec::with_capacity(x.len() + cp_len);
    out.extend_from_slice(&x[x.len() - cp_len..]);
    out.extend_from_slice(x);
    Ok(out)
}

pub fn remove_cyclic_prefix(x: &[Complex64], cp_len: usize, k: usize) -> Result<Vec<Complex64>> {
    if x.len() != k + cp_len {
        return error::input(format!("expected {} samples, got {}", k + cp_len, x.len()));
    }
    Ok(x[cp_len..].to_vec())
}
