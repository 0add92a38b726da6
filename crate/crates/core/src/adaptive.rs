//! Jamming-adaptive operation over one coherence block.
//!
//! The first `T_e` OFDM symbols use 4-QAM with the approximate detector,
//! which needs no jamming knowledge. Its per-block decisions `(s_hat, J_hat)`
//! feed two estimates: the most frequent `J_hat` and the average residual
//! power on the blocks judged jammed. At the phase boundary the transmitter
//! switches to the order minimizing the averaged bound for those estimates,
//! and the remaining symbols are decoded by the sorted-residual detector
//! with the estimated variance.

use num_complex::Complex64;
use rand::Rng;

use crate::analysis::optimize_order;
use crate::detect::{approx_mld, lowcomp_unchecked, residual_energies};
use crate::error::{self, Result};
use crate::frame::SystemConfig;
use crate::link::{CoherenceBlock, Link};
use crate::spreading::{Codebook, SpreadingMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JammingEstimate {
    /// Most frequent detected jammed count per block.
    pub j_avg_hat: usize,
    /// Average residual power per detected jammed subcarrier.
    pub sigma_z2_avg_hat: f64,
    /// Block decisions the estimates are based on.
    pub samples_used: usize,
}

/// Mode of `observations` over `0..=n`; the smallest value wins ties.
pub fn estimate_j_avg(observations: &[usize], n: usize) -> Result<usize> {
    if observations.is_empty() {
        return error::input("no jammed-count observations");
    }
    let mut counts = vec![0usize; n + 1];
    for &j in observations {
        if j > n {
            return error::input(format!("observation J={j} exceeds block size {n}"));
        }
        counts[j] += 1;
    }
    let mut best = 0;
    for j in 1..=n {
        if counts[j] > counts[best] {
            best = j;
        }
    }
    Ok(best)
}

/// Running sums for the residual-power estimate.
#[derive(Debug, Clone, Default)]
pub struct ResidualPower {
    excess: f64,
    jammed: usize,
    samples: usize,
}

impl ResidualPower {
    /// Adds one block decision: `residual_energy = ||y - H U s_hat||^2` over
    /// `n` subcarriers with `j_hat` of them judged jammed.
    pub fn push(&mut self, residual_energy: f64, n: usize, j_hat: usize, sigma_w2: f64) {
        if j_hat > 0 {
            self.excess += (residual_energy - n as f64 * sigma_w2).max(0.0);
            self.jammed += j_hat;
        }
        self.samples += 1;
    }

    /// Sum of excess power over the sum of jammed counts, 0 if nothing was
    /// judged jammed.
    pub fn estimate(&self) -> f64 {
        if self.jammed == 0 {
            0.0
        } else {
            self.excess / self.jammed as f64
        }
    }

    pub fn samples(&self) -> usize {
        self.samples
    }
}

/// One phase-1 block decision.
#[derive(Debug, Clone)]
pub struct BlockDecision<'a> {
    pub y: &'a [Complex64],
    pub h: &'a [Complex64],
    pub s_hat: &'a [Complex64],
    pub j_hat: usize,
}

pub fn estimate_sigma_z2_avg(blocks: &[BlockDecision<'_>], sm: &SpreadingMatrix, sigma_w2: f64) -> Result<f64> {
    if blocks.is_empty() {
        return error::input("no block decisions");
    }
    let mut acc = ResidualPower::default();
    let mut r = vec![0.0; sm.n_subcarriers()];
    for b in blocks {
        if b.y.len() != b.h.len() || b.y.len() > sm.n_subcarriers() || b.j_hat > b.y.len() {
            return error::input("block decision does not match the spreading matrix");
        }
        let x = sm.apply(b.s_hat);
        residual_energies(b.y, b.h, &x, &mut r);
        acc.push(r[..b.y.len()].iter().sum(), b.y.len(), b.j_hat, sigma_w2);
    }
    Ok(acc.estimate())
}

#[derive(Debug, Clone, Default)]
pub struct AdaptiveOptions {
    /// Replaces the estimates `(J_avg, sigma_z2)` at the phase boundary.
    pub oracle: Option<(usize, f64)>,
    /// Replaces the optimized order.
    pub force_order: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveOutcome {
    /// Transmitted block values, symbol-major (`T x G`).
    pub sent: Vec<usize>,
    /// Decoded block values, same layout.
    pub decoded: Vec<usize>,
    pub bits_per_block: usize,
    pub estimate: JammingEstimate,
    /// Order used after the phase boundary; `None` when `T_e = T`.
    pub m_star: Option<usize>,
    /// Detected jammed count of every phase-1 block decision.
    pub j_hats: Vec<usize>,
}

impl AdaptiveOutcome {
    pub fn bit_errors(&self) -> u64 {
        self.sent
            .iter()
            .zip(&self.decoded)
            .map(|(a, b)| (a ^ b).count_ones() as u64)
            .sum()
    }

    pub fn bits_sent(&self) -> u64 {
        (self.sent.len() * self.bits_per_block) as u64
    }
}

/// Runs both phases over one coherence block. `cfg.m` is ignored; the
/// receiver never sees `cfg.sigma_z2`.
pub fn run_adaptive<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    block: &CoherenceBlock,
    data_rng: &mut R,
    noise_rng: &mut R,
    opts: &AdaptiveOptions,
) -> Result<AdaptiveOutcome> {
    if !cfg.p.is_multiple_of(2) {
        return error::config(format!("adaptive operation needs an even p for 4-QAM (p={})", cfg.p));
    }
    if cfg.t_e == 0 || cfg.t_e > cfg.t {
        return error::config(format!("need 1 <= T_e <= T (T_e={}, T={})", cfg.t_e, cfg.t));
    }
    let (n, g) = (cfg.n, cfg.g);
    let mut link = Link::new(cfg)?;
    let lens: Vec<usize> = (0..g).map(|b| link.interleaver().block_len(b)).collect();
    let qpsk = Codebook::for_order(cfg.p, n, 4)?;
    let mut tx = vec![Complex64::new(0.0, 0.0); g * n];
    let mut sent = Vec::with_capacity(cfg.t * g);
    let mut decoded = Vec::with_capacity(cfg.t * g);
    let mut j_hats = Vec::with_capacity(cfg.t_e * g);
    let mut power = ResidualPower::default();
    let mut r = vec![0.0; n];

    for t in 0..cfg.t_e {
        let values = draw_values(data_rng, cfg.p, g);
        for (b, &v) in values.iter().enumerate() {
            tx[b * n..(b + 1) * n].copy_from_slice(qpsk.vector(v));
        }
        let (y, h) = link.transmit(&tx, block, t, cfg.sigma_w2, noise_rng);
        for (b, &len) in lens.iter().enumerate() {
            let (yb, hb) = (&y[b * n..b * n + len], &h[b * n..b * n + len]);
            let d = approx_mld(yb, hb, &qpsk, cfg.sigma_w2)?;
            residual_energies(yb, hb, qpsk.vector(d.candidate), &mut r);
            power.push(r[..len].iter().sum(), len, d.j_hat, cfg.sigma_w2);
            j_hats.push(d.j_hat);
            decoded.push(d.candidate);
        }
        sent.extend(values);
    }

    let estimate = JammingEstimate {
        j_avg_hat: estimate_j_avg(&j_hats, n)?,
        sigma_z2_avg_hat: power.estimate(),
        samples_used: power.samples(),
    };

    let m_star = if cfg.t_e < cfg.t {
        let (j_avg, sigma_z2) = opts.oracle.unwrap_or((estimate.j_avg_hat, estimate.sigma_z2_avg_hat));
        let m = match opts.force_order {
            Some(m) => m,
            None => optimize_order(cfg.p, n, j_avg, sigma_z2, cfg.sigma_w2, block.mean_power())?,
        };
        let cb = Codebook::for_order(cfg.p, n, m)?;
        for t in cfg.t_e..cfg.t {
            let values = draw_values(data_rng, cfg.p, g);
            for (b, &v) in values.iter().enumerate() {
                tx[b * n..(b + 1) * n].copy_from_slice(cb.vector(v));
            }
            let (y, h) = link.transmit(&tx, block, t, cfg.sigma_w2, noise_rng);
            for (b, &len) in lens.iter().enumerate() {
                let d = lowcomp_unchecked(&y[b * n..b * n + len], &h[b * n..b * n + len], &cb, cfg.sigma_w2, sigma_z2);
                decoded.push(d.candidate);
            }
            sent.extend(values);
        }
        Some(m)
    } else {
        None
    };

    Ok(AdaptiveOutcome {
        sent,
        decoded,
        bits_per_block: cfg.p,
        estimate,
        m_star,
        j_hats,
    })
}

/// One uniformly random `p`-bit value per block.
pub(crate) fn draw_values<R: Rng + ?Sized>(rng: &mut R, p: usize, g: usize) -> Vec<usize> {
    (0..g).map(|_| rng.random_range(0..1usize << p)).collect()
}
