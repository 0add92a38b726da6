//! Comparison frameworks: QAM-OFDM with random subcarrier selection and
//! OFDM with index modulation.
//!
//! Both map a `p`-bit block value onto `N` subcarriers and back. Block values
//! are big-endian integers, so bit errors are `popcount(sent ^ decided)`.

use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;

use crate::constellation::Constellation;
use crate::error::{self, Result};

fn bits_value(bits: &[u8]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
}

fn push_value(v: usize, p: usize, out: &mut Vec<u8>) {
    out.extend((0..p).map(|b| ((v >> (p - 1 - b)) & 1) as u8));
}

/// Nearest point to `y / (h a)` by the metric `|y - h a x|^2`; index 0 wins ties.
fn nearest(c: &Constellation, y: Complex64, ha: Complex64) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, &x) in c.points().iter().enumerate() {
        let d = (y - ha * x).norm_sqr();
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// `S` symbols on `S` randomly chosen subcarriers of a block, boosted by
/// `sqrt(N/S)`. The chosen indices are known to the receiver.
#[derive(Debug, Clone)]
pub struct QamOfdm {
    n: usize,
    s: usize,
    constellation: Constellation,
    scale: f64,
}

impl QamOfdm {
    pub fn new(p: usize, n: usize, constellation: Constellation) -> Result<Self> {
        let bps = constellation.bits_per_symbol() as usize;
        if p == 0 || !p.is_multiple_of(bps) {
            return error::config(format!("p={p} is not a positive multiple of log2(M)={bps}"));
        }
        let s = p / bps;
        if s > n {
            return error::config(format!("S={s} symbols do not fit on N={n} subcarriers"));
        }
        Ok(Self {
            n,
            s,
            constellation,
            scale: (n as f64 / s as f64).sqrt(),
        })
    }

    pub fn n_symbols(&self) -> usize {
        self.s
    }

    pub fn bits_per_block(&self) -> usize {
        self.s * self.constellation.bits_per_symbol() as usize
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    fn digit(&self, value: usize, j: usize) -> usize {
        let m = self.constellation.bits_per_symbol() as usize;
        (value >> (m * (self.s - 1 - j))) & (self.constellation.order() - 1)
    }

    /// Writes the block for `value` into `out` (length `N`) and the ascending
    /// active indices into `active`.
    pub fn modulate_value<R: Rng + ?Sized>(
        &self,
        value: usize,
        rng: &mut R,
        out: &mut [Complex64],
        active: &mut Vec<usize>,
    ) {
        active.clear();
        active.extend(index::sample(rng, self.n, self.s).iter());
        active.sort_unstable();
        out.fill(Complex64::new(0.0, 0.0));
        for (j, &i) in active.iter().enumerate() {
            out[i] = self.constellation.point(self.digit(value, j)) * self.scale;
        }
    }

    /// Per-subcarrier nearest-point decision on the active subcarriers.
    /// Scaling the metric by a per-subcarrier variance would not change any
    /// decision, so none is taken.
    pub fn detect_value(&self, y: &[Complex64], h: &[Complex64], active: &[usize]) -> usize {
        let m = self.constellation.bits_per_symbol() as usize;
        active.iter().fold(0usize, |acc, &i| {
            let (k, _) = nearest(&self.constellation, y[i], h[i] * self.scale);
            (acc << m) | k
        })
    }
}

pub fn qamofdm_modulate<R: Rng + ?Sized>(
    bits: &[u8],
    n: usize,
    constellation: &Constellation,
    rng: &mut R,
) -> Result<(Vec<Complex64>, Vec<usize>)> {
    let q = QamOfdm::new(bits.len(), n, constellation.clone())?;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut active = Vec::new();
    q.modulate_value(bits_value(bits), rng, &mut out, &mut active);
    Ok((out, active))
}

pub fn qamofdm_detect(
    y: &[Complex64],
    h: &[Complex64],
    active: &[usize],
    constellation: &Constellation,
) -> Result<Vec<u8>> {
    let p = active.len() * constellation.bits_per_symbol() as usize;
    let q = QamOfdm::new(p, y.len(), constellation.clone())?;
    let mut bits = Vec::with_capacity(p);
    push_value(q.detect_value(y, h, active), p, &mut bits);
    Ok(bits)
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// The `rank`-th `k`-subset of `0..n` in colexicographic order.
pub fn unrank_colex(mut rank: usize, k: usize) -> Vec<usize> {
    let mut out = vec![0; k];
    for i in (1..=k).rev() {
        let mut c = i - 1;
        while binomial(c + 1, i) <= rank {
            c += 1;
        }
        rank -= binomial(c, i);
        out[i - 1] = c;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OfdmImConfig {
    pub n: usize,
    /// Active subcarriers per block.
    pub n_a: usize,
    pub m: usize,
    /// Bits selecting the active set, `floor(log2 C(N, N_A))`.
    pub p_index: usize,
    /// Bits on the active subcarriers, `N_A log2 M`.
    pub p_mod: usize,
}

impl OfdmImConfig {
    pub fn new(n: usize, n_a: usize, m: usize) -> Result<Self> {
        if n_a == 0 || n_a > n || n > 63 {
            return error::config(format!("OFDM-IM needs 1 <= N_A <= N (N={n}, N_A={n_a})"));
        }
        if m < 2 || !m.is_power_of_two() {
            return error::config(format!("OFDM-IM order M={m} is not a power of two >= 2"));
        }
        let subsets = binomial(n, n_a);
        Ok(Self {
            n,
            n_a,
            m,
            p_index: subsets.ilog2() as usize,
            p_mod: n_a * m.trailing_zeros() as usize,
        })
    }

    pub fn bits_per_block(&self) -> usize {
        self.p_index + self.p_mod
    }

    /// Every `(N_A, M)` pair carrying exactly `p` bits on `N` subcarriers
    /// with at least one index bit.
    pub fn all_for(p: usize, n: usize) -> Vec<Self> {
        let mut out = Vec::new();
        for n_a in 1..=n {
            for b in 1..=16 {
                if let Ok(cfg) = Self::new(n, n_a, 1 << b) {
                    if cfg.p_index > 0 && cfg.bits_per_block() == p {
                        out.push(cfg);
                    }
                }
            }
        }
        out
    }
}

/// Index modulation: index bits pick `N_A` active subcarriers, the remaining
/// bits modulate them with gain `sqrt(N / N_A)`.
#[derive(Debug, Clone)]
pub struct OfdmIm {
    cfg: OfdmImConfig,
    constellation: Constellation,
    subsets: Vec<Vec<usize>>,
    scale: f64,
}

impl OfdmIm {
    pub fn new(cfg: OfdmImConfig) -> Result<Self> {
        let check = OfdmImConfig::new(cfg.n, cfg.n_a, cfg.m)?;
        if check != cfg {
            return error::config(format!("inconsistent OFDM-IM configuration {cfg:?}"));
        }
        Ok(Self {
            constellation: Constellation::for_order(cfg.m)?,
            subsets: (0..1usize << cfg.p_index).map(|r| unrank_colex(r, cfg.n_a)).collect(),
            scale: (cfg.n as f64 / cfg.n_a as f64).sqrt(),
            cfg,
        })
    }

    pub fn config(&self) -> &OfdmImConfig {
        &self.cfg
    }

    pub fn bits_per_block(&self) -> usize {
        self.cfg.bits_per_block()
    }

    pub fn active_set(&self, rank: usize) -> &[usize] {
        &self.subsets[rank]
    }

    pub fn modulate_value(&self, value: usize, out: &mut [Complex64]) {
        let m = self.constellation.bits_per_symbol() as usize;
        let rank = value >> self.cfg.p_mod;
        out.fill(Complex64::new(0.0, 0.0));
        for (j, &i) in self.subsets[rank].iter().enumerate() {
            let digit = (value >> (m * (self.cfg.n_a - 1 - j))) & (self.cfg.m - 1);
            out[i] = self.constellation.point(digit) * self.scale;
        }
    }

    /// Joint ML over active sets and symbols. `variances` gives the
    /// per-subcarrier disturbance variance; `None` treats all subcarriers
    /// alike, as a receiver unaware of the jammer does.
    pub fn detect_value(&self, y: &[Complex64], h: &[Complex64], variances: Option<&[f64]>) -> usize {
        let n = y.len();
        let w = |i: usize| variances.map_or(1.0, |v| 1.0 / v[i]);
        // per-subcarrier cost of being idle vs. the best active symbol
        let idle: Vec<f64> = (0..n).map(|i| y[i].norm_sqr() * w(i)).collect();
        let active: Vec<(usize, f64)> = (0..n)
            .map(|i| {
                let (k, d) = nearest(&self.constellation, y[i], h[i] * self.scale);
                (k, d * w(i))
            })
            .collect();
        let idle_total: f64 = idle.iter().sum();
        let mut best = (f64::INFINITY, 0usize);
        for (rank, set) in self.subsets.iter().enumerate() {
            let cost = idle_total + set.iter().map(|&i| active[i].1 - idle[i]).sum::<f64>();
            if cost < best.0 {
                best = (cost, rank);
            }
        }
        let m = self.constellation.bits_per_symbol() as usize;
        let symbols = self.subsets[best.1].iter().fold(0usize, |acc, &i| (acc << m) | active[i].0);
        (best.1 << self.cfg.p_mod) | symbols
    }
}

pub fn ofdmim_modulate(bits: &[u8], cfg: &OfdmImConfig) -> Result<Vec<Complex64>> {
    if bits.len() != cfg.bits_per_block() {
        return error::input(format!("expected {} bits, got {}", cfg.bits_per_block(), bits.len()));
    }
    let im = OfdmIm::new(*cfg)?;
    let mut out = vec![Complex64::new(0.0, 0.0); cfg.n];
    im.modulate_value(bits_value(bits), &mut out);
    Ok(out)
}

pub fn ofdmim_detect(
    y: &[Complex64],
    h: &[Complex64],
    cfg: &OfdmImConfig,
    variances: Option<&[f64]>,
) -> Result<Vec<u8>> {
    let im = OfdmIm::new(*cfg)?;
    let mut bits = Vec::with_capacity(cfg.bits_per_block());
    push_value(im.detect_value(y, h, variances), cfg.bits_per_block(), &mut bits);
    Ok(bits)
}
