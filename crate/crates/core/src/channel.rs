//! Rayleigh fading, AWGN and jamming realizations in the frequency domain.
//!
//! Per subcarrier `y_k = h_k x_k + c_k z_k + w_k`. All draws take an explicit
//! RNG; [`stream`] derives independent, reproducible substreams per trial and
//! role so trials can run in any order on any number of workers.

use num_complex::Complex64;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{self, Result};
use crate::frame::{FrequencyFrame, SystemConfig};

/// What a substream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamRole {
    Data = 0,
    Channel = 1,
    Jamming = 2,
    Noise = 3,
}

/// Counter-based substream keyed by `(seed, trial, role)`.
pub fn stream(seed: u64, trial: u64, role: StreamRole) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial.wrapping_mul(4).wrapping_add(role as u64));
    rng
}

/// Draws from `CN(0, variance)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let sd = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * sd, im * sd)
}

/// `(sigma_w^2, sigma_z^2)` from SNR = 1/sigma_w^2 and SJR = 1/sigma_z^2 in dB.
pub fn snr_sjr_to_variances(snr_db: f64, sjr_db: f64) -> (f64, f64) {
    (10f64.powf(-snr_db / 10.0), 10f64.powf(-sjr_db / 10.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Channel frequency response, one gain per subcarrier.
    pub cfr: Vec<Complex64>,
    /// Per-subcarrier mean power `E|h_k|^2`.
    pub power_profile: Vec<f64>,
}

impl ChannelRealization {
    /// Mean channel power across subcarriers.
    pub fn mean_power(&self) -> f64 {
        self.power_profile.iter().sum::<f64>() / self.power_profile.len() as f64
    }
}

/// I.i.d. Rayleigh gains with `E|h_k|^2 = power_profile[k]`.
pub fn draw_channel<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    power_profile: &[f64],
    rng: &mut R,
) -> Result<ChannelRealization> {
    if power_profile.len() != cfg.k {
        return error::input(format!(
            "power profile has {} entries, expected K={}",
            power_profile.len(),
            cfg.k
        ));
    }
    if let Some(bad) = power_profile.iter().find(|&&p| !(p > 0.0 && p.is_finite())) {
        return error::input(format!("channel power {bad} is not positive"));
    }
    Ok(ChannelRealization {
        cfr: power_profile.iter().map(|&p| complex_gaussian(rng, p)).collect(),
        power_profile: power_profile.to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JammingPattern {
    /// One contiguous band, placed at random per coherence block.
    PartialBand,
    /// A fresh uniformly random subset in every OFDM symbol.
    Random,
}

impl JammingPattern {
    pub fn as_str(self) -> &'static str {
        match self {
            JammingPattern::PartialBand => "partial_band",
            JammingPattern::Random => "random",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JammingRealization {
    /// `indicators[t][k]` is true when subcarrier `k` is jammed in symbol `t`.
    pub indicators: Vec<Vec<bool>>,
    /// Jamming samples `z_f(t)`, drawn for every subcarrier.
    pub samples: Vec<Vec<Complex64>>,
    pub sigma_z2: f64,
    pub pattern: JammingPattern,
    pub rho_frac: f64,
    /// Jammed subcarriers per symbol, `round(rho K)`.
    pub j_tot: usize,
}

/// Number of jammed subcarriers for a jamming fraction.
pub fn jammed_count(k: usize, rho_frac: f64) -> usize {
    ((rho_frac * k as f64).round() as usize).min(k)
}

/// Indicator of the contiguous band `offset..offset + j_tot`.
pub fn partial_band_indicator(k: usize, j_tot: usize, offset: usize) -> Vec<bool> {
    (0..k).map(|i| i >= offset && i < offset + j_tot).collect()
}

pub fn draw_jamming<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    pattern: JammingPattern,
    rho_frac: f64,
    rng: &mut R,
) -> Result<JammingRealization> {
    if !(0.0..=1.0).contains(&rho_frac) {
        return error::config(format!("jamming fraction {rho_frac} outside [0, 1]"));
    }
    let (k, t) = (cfg.k, cfg.t);
    let j_tot = jammed_count(k, rho_frac);
    let indicators = match pattern {
        JammingPattern::PartialBand => {
            let offset = rng.random_range(0..=k - j_tot);
            vec![partial_band_indicator(k, j_tot, offset); t]
        }
        JammingPattern::Random => (0..t)
            .map(|_| {
                let mut c = vec![false; k];
                for i in index::sample(rng, k, j_tot) {
                    c[i] = true;
                }
                c
            })
            .collect(),
    };
    let samples = (0..t)
        .map(|_| (0..k).map(|_| complex_gaussian(rng, cfg.sigma_z2)).collect())
        .collect();
    Ok(JammingRealization {
        indicators,
        samples,
        sigma_z2: cfg.sigma_z2,
        pattern,
        rho_frac,
        j_tot,
    })
}

/// `y_f = H_f x_f + C_f(t) z_f(t) + w_f` for OFDM symbol `t`.
pub fn apply_channel<R: Rng + ?Sized>(
    x_f: &FrequencyFrame,
    ch: &ChannelRealization,
    jam: &JammingRealization,
    t: usize,
    sigma_w2: f64,
    rng: &mut R,
) -> Result<FrequencyFrame> {
    let k = x_f.len();
    if ch.cfr.len() != k || jam.indicators.get(t).is_none_or(|c| c.len() != k) {
        return error::input(format!(
            "channel/jamming dimensions do not match frame of length {k} at symbol {t}"
        ));
    }
    let mut y = FrequencyFrame::zeros(k);
    apply_channel_into(&x_f.values, ch, jam, t, sigma_w2, rng, &mut y.values);
    Ok(y)
}

/// Unchecked in-place form of [`apply_channel`].
pub fn apply_channel_into<R: Rng + ?Sized>(
    x_f: &[Complex64],
    ch: &ChannelRealization,
    jam: &JammingRealization,
    t: usize,
    sigma_w2: f64,
    rng: &mut R,
    y: &mut [Complex64],
) {
    let c = &jam.indicators[t];
    let z = &jam.samples[t];
    for k in 0..x_f.len() {
        let mut v = ch.cfr[k] * x_f[k] + complex_gaussian(rng, sigma_w2);
        if c[k] {
            v += z[k];
        }
        y[k] = v;
    }
}
