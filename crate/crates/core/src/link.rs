//! One coherence block of the link: `T` OFDM symbols sharing a jamming
//! realization, with a fresh Rayleigh draw per symbol.
//!
//! Transmitters hand over block-major vectors (`G` blocks of `N` entries);
//! [`Link::transmit`] interleaves them onto the `K` subcarriers, applies
//! channel, jamming and noise, and returns the received values and channel
//! gains deinterleaved back into block-major order.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{
    apply_channel_into, draw_channel, draw_jamming, stream, ChannelRealization, JammingPattern, JammingRealization,
    StreamRole,
};
use crate::error::Result;
use crate::frame::{Interleaver, SystemConfig};

/// Channel and jamming realizations of one coherence block.
#[derive(Debug, Clone)]
pub struct CoherenceBlock {
    /// One channel realization per OFDM symbol.
    pub channels: Vec<ChannelRealization>,
    pub jamming: JammingRealization,
}

impl CoherenceBlock {
    /// Draws with unit average channel power on every subcarrier.
    pub fn draw<R: Rng + ?Sized>(
        cfg: &SystemConfig,
        pattern: JammingPattern,
        rho_frac: f64,
        channel_rng: &mut R,
        jamming_rng: &mut R,
    ) -> Result<Self> {
        let profile = vec![1.0; cfg.k];
        let channels = (0..cfg.t)
            .map(|_| draw_channel(cfg, &profile, channel_rng))
            .collect::<Result<Vec<_>>>()?;
        let jamming = draw_jamming(cfg, pattern, rho_frac, jamming_rng)?;
        Ok(Self { channels, jamming })
    }

    /// Draws from the trial's channel and jamming substreams.
    pub fn for_trial(
        cfg: &SystemConfig,
        pattern: JammingPattern,
        rho_frac: f64,
        seed: u64,
        trial: u64,
    ) -> Result<Self> {
        let mut ch = stream(seed, trial, StreamRole::Channel);
        let mut jam = stream(seed, trial, StreamRole::Jamming);
        Self::draw(cfg, pattern, rho_frac, &mut ch, &mut jam)
    }

    /// Mean channel power across subcarriers.
    pub fn mean_power(&self) -> f64 {
        self.channels.first().map_or(1.0, ChannelRealization::mean_power)
    }
}

/// Reusable buffers for passing block-major vectors through the link.
#[derive(Debug, Clone)]
pub struct Link {
    interleaver: Interleaver,
    frame: Vec<Complex64>,
    received: Vec<Complex64>,
    y_blocks: Vec<Complex64>,
    h_blocks: Vec<Complex64>,
}

impl Link {
    pub fn new(cfg: &SystemConfig) -> Result<Self> {
        let interleaver = Interleaver::for_config(cfg)?;
        let zero = Complex64::new(0.0, 0.0);
        Ok(Self {
            frame: vec![zero; cfg.k],
            received: vec![zero; cfg.k],
            y_blocks: vec![zero; cfg.g * cfg.n],
            h_blocks: vec![zero; cfg.g * cfg.n],
            interleaver,
        })
    }

    pub fn interleaver(&self) -> &Interleaver {
        &self.interleaver
    }

    /// Sends block-major `blocks` in symbol `t`; returns block-major
    /// `(y, h)`, zero on padded entries.
    pub fn transmit<R: Rng + ?Sized>(
        &mut self,
        blocks: &[Complex64],
        cb: &CoherenceBlock,
        t: usize,
        sigma_w2: f64,
        noise_rng: &mut R,
    ) -> (&[Complex64], &[Complex64]) {
        let ch = &cb.channels[t];
        self.interleaver.interleave_into(blocks, &mut self.frame);
        apply_channel_into(&self.frame, ch, &cb.jamming, t, sigma_w2, noise_rng, &mut self.received);
        self.interleaver.deinterleave_into(&self.received, &mut self.y_blocks);
        self.interleaver.deinterleave_into(&ch.cfr, &mut self.h_blocks);
        (&self.y_blocks, &self.h_blocks)
    }

    /// Number of jammed entries of each block in symbol `t`.
    pub fn jammed_per_block(&self, cb: &CoherenceBlock, t: usize) -> Vec<usize> {
        let mut counts = vec![0; self.interleaver.n_blocks()];
        for (k, &c) in cb.jamming.indicators[t].iter().enumerate() {
            if c {
                counts[self.interleaver.entry(k).0] += 1;
            }
        }
        counts
    }

    /// Jamming indicator of every block entry in symbol `t`, block-major.
    pub fn block_indicators(&self, cb: &CoherenceBlock, t: usize) -> Vec<bool> {
        let n = self.interleaver.block_size();
        let mut out = vec![false; self.interleaver.n_blocks() * n];
        for (k, &c) in cb.jamming.indicators[t].iter().enumerate() {
            let (g, pos) = self.interleaver.entry(k);
            out[g * n + pos] = c;
        }
        out
    }
}
