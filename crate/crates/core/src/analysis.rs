//! Pairwise error probabilities, union bounds on the block BER, and
//! modulation-order selection.
//!
//! With `d = U (s - s_hat)`, `a_i = |d_i|^2` and per-subcarrier disturbance
//! variance `v_i = c_i sz + sw`, the conditional PEP is
//! `Q(sqrt(sum_i |h_i|^2 a_i / (2 v_i)))`. Averaging the two-exponential
//! Q approximation over Rayleigh gains of power `rho_i` gives
//!
//! ```text
//! (1/12) / prod(1 + rho_i a_i / (4 v_i)) + (1/4) / prod(1 + rho_i a_i / (3 v_i))
//! ```
//!
//! which the union bound weights by Hamming distance and sums over ordered
//! candidate pairs. Bounds are reported unclamped and may exceed 1 at low SNR.

use num_complex::Complex64;

use crate::channel::JammingPattern;
use crate::error::{self, Result};
use crate::frame::Interleaver;
use crate::spreading::{Codebook, SpreadingMatrix};

/// Largest codebook the exhaustive pair sum accepts.
pub const BOUND_MAX_CANDIDATES: usize = 1 << 16;

/// Gaussian tail probability.
pub fn q(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// `(1/12) e^{-x^2/2} + (1/4) e^{-2x^2/3}`.
pub fn q_approx(x: f64) -> f64 {
    (-x * x / 2.0).exp() / 12.0 + (-2.0 * x * x / 3.0).exp() / 4.0
}

fn disturbance(c: &[bool], sigma_w2: f64, sigma_z2: f64) -> Vec<f64> {
    c.iter().map(|&j| if j { sigma_z2 + sigma_w2 } else { sigma_w2 }).collect()
}

fn difference(sm: &SpreadingMatrix, s: &[Complex64], s_hat: &[Complex64]) -> Vec<Complex64> {
    let diff: Vec<Complex64> = s.iter().zip(s_hat).map(|(a, b)| a - b).collect();
    sm.apply(&diff)
}

/// Exact PEP conditioned on the channel `h` and indicator `c`.
pub fn pep_conditional(
    s: &[Complex64],
    s_hat: &[Complex64],
    h: &[Complex64],
    sm: &SpreadingMatrix,
    c: &[bool],
    sigma_w2: f64,
    sigma_z2: f64,
) -> f64 {
    let d = difference(sm, s, s_hat);
    let v = disturbance(c, sigma_w2, sigma_z2);
    let arg: f64 = (0..h.len()).map(|i| h[i].norm_sqr() * d[i].norm_sqr() / v[i]).sum::<f64>() / 2.0;
    q(arg.sqrt())
}

/// Rayleigh-averaged PEP from distance profile `a`, disturbance `v` and
/// channel powers `rho`.
fn pep_average_terms(a: impl Iterator<Item = f64>, v: &[f64], rho: &[f64]) -> f64 {
    let (mut p4, mut p3) = (1.0, 1.0);
    for (i, ai) in a.enumerate() {
        let r = rho[i] * ai / v[i];
        p4 *= 1.0 + r / 4.0;
        p3 *= 1.0 + r / 3.0;
    }
    1.0 / (12.0 * p4) + 1.0 / (4.0 * p3)
}

/// Rayleigh-averaged PEP under the Q approximation.
pub fn pep_average(
    s: &[Complex64],
    s_hat: &[Complex64],
    sm: &SpreadingMatrix,
    c: &[bool],
    sigma_w2: f64,
    sigma_z2: f64,
    rho: &[f64],
) -> f64 {
    let d = difference(sm, s, s_hat);
    let v = disturbance(c, sigma_w2, sigma_z2);
    pep_average_terms(d.iter().take(c.len()).map(|z| z.norm_sqr()), &v, rho)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerBoundReport {
    /// Union-bound value, possibly above 1.
    pub value: f64,
    pub order: usize,
    /// Number of jammed subcarriers assumed (weight of `c` for the exact bound).
    pub j_avg: usize,
    pub sigma_z2: f64,
    /// Mean channel power.
    pub rho_bar: f64,
}

impl BerBoundReport {
    /// True when the bound is above 1 and therefore vacuous.
    pub fn exceeds_one(&self) -> bool {
        self.value > 1.0
    }
}

fn check_budget(cb: &Codebook) -> Result<()> {
    if cb.len() > BOUND_MAX_CANDIDATES {
        return error::config(format!(
            "union bound over {} candidates exceeds the 2^16 budget; use the averaged bound with a smaller block",
            cb.len()
        ));
    }
    Ok(())
}

/// Sum over unordered pairs of `weight(a) * hamming`, scaled to the BER.
fn pair_sum(cb: &Codebook, n: usize, mut pep: impl FnMut(&mut [f64]) -> f64) -> f64 {
    let p = cb.bits_per_block();
    let mut a = vec![0.0; n];
    let mut total = 0.0;
    for k in 0..cb.len() {
        let x = cb.vector(k);
        for l in k + 1..cb.len() {
            let xh = cb.vector(l);
            for i in 0..n {
                a[i] = (x[i] - xh[i]).norm_sqr();
            }
            total += pep(&mut a) * (k ^ l).count_ones() as f64;
        }
    }
    2.0 * total / (p as f64 * cb.len() as f64)
}

/// Union bound on the block BER for a specific indicator `c` and channel
/// powers `rho`. A `c` shorter than `N` bounds a padded block that uses only
/// the first `c.len()` subcarriers.
pub fn ber_upper(cb: &Codebook, c: &[bool], sigma_w2: f64, sigma_z2: f64, rho: &[f64]) -> Result<BerBoundReport> {
    check_budget(cb)?;
    let n = c.len();
    if n == 0 || n > cb.n_subcarriers() || rho.len() < n {
        return error::input(format!(
            "indicator length {n} or {} channel powers incompatible with block size {}",
            rho.len(),
            cb.n_subcarriers()
        ));
    }
    let v = disturbance(c, sigma_w2, sigma_z2);
    let value = pair_sum(cb, n, |a| pep_average_terms(a.iter().copied(), &v, rho));
    Ok(BerBoundReport {
        value,
        order: cb.constellation().order(),
        j_avg: c.iter().filter(|&&b| b).count(),
        sigma_z2,
        rho_bar: rho[..n].iter().sum::<f64>() / n as f64,
    })
}

/// Union bound with `j_avg` jammed subcarriers placed, for every pair, on the
/// largest entries of `|U (s - s_hat)|^2`, and uniform channel power.
pub fn ber_upper_avg(
    cb: &Codebook,
    j_avg: usize,
    sigma_w2: f64,
    sigma_z2: f64,
    rho_bar: f64,
) -> Result<BerBoundReport> {
    check_budget(cb)?;
    let n = cb.n_subcarriers();
    if j_avg > n {
        return error::input(format!("J_avg={j_avg} exceeds block size {n}"));
    }
    let mut v = vec![sigma_w2; n];
    v[..j_avg].fill(sigma_z2 + sigma_w2);
    let rho = vec![rho_bar; n];
    let value = pair_sum(cb, n, |a| {
        a.sort_unstable_by(|x, y| y.total_cmp(x));
        pep_average_terms(a.iter().copied(), &v, &rho)
    });
    Ok(BerBoundReport {
        value,
        order: cb.constellation().order(),
        j_avg,
        sigma_z2,
        rho_bar,
    })
}

/// Orders `2^(p/S)` for every `1 <= S <= N` dividing `p`, ascending.
pub fn candidate_orders(p: usize, n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (1..=n.min(p))
        .filter(|s| p.is_multiple_of(*s) && p / s <= 16)
        .map(|s| 1usize << (p / s))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Candidate order with the smallest averaged bound; ties go to the smaller
/// order.
pub fn optimize_order(
    p: usize,
    n: usize,
    j_avg: usize,
    sigma_z2: f64,
    sigma_w2: f64,
    rho_bar: f64,
) -> Result<usize> {
    let candidates = candidate_orders(p, n);
    if candidates.is_empty() {
        return error::config(format!("no modulation order carries p={p} bits on N={n} subcarriers"));
    }
    let mut best = (f64::INFINITY, candidates[0]);
    for m in candidates {
        let cb = Codebook::for_order(p, n, m)?;
        let v = ber_upper_avg(&cb, j_avg, sigma_w2, sigma_z2, rho_bar)?.value;
        if v < best.0 {
            best = (v, m);
        }
    }
    Ok(best.1)
}

fn ln_choose(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let lf = |x: usize| libm::lgamma(x as f64 + 1.0);
    lf(n) - lf(k) - lf(n - k)
}

/// Union bound averaged over the blocks of a frame and over the jamming
/// model with `j_tot` jammed subcarriers out of `K`, uniform channel power.
///
/// Partial-band jamming averages over every band offset; random jamming
/// weights each block indicator by its hypergeometric probability.
pub fn expected_ber_upper(
    cb: &Codebook,
    interleaver: &Interleaver,
    pattern: JammingPattern,
    j_tot: usize,
    sigma_w2: f64,
    sigma_z2: f64,
    rho_bar: f64,
) -> Result<f64> {
    let k = interleaver.n_subcarriers();
    let n = interleaver.block_size();
    if n != cb.n_subcarriers() || j_tot > k {
        return error::input(format!(
            "codebook block size {} / J_tot={j_tot} incompatible with K={k}, N={n}",
            cb.n_subcarriers()
        ));
    }
    if n > 16 {
        return error::config(format!("expected bound enumerates 2^N indicators; N={n} is too large"));
    }
    let rho = vec![rho_bar; n];
    // weight per (block length, indicator mask)
    let mut weights: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
    let g = interleaver.n_blocks();
    match pattern {
        JammingPattern::PartialBand => {
            let offsets = k - j_tot + 1;
            let w = 1.0 / (offsets * g) as f64;
            for off in 0..offsets {
                for b in 0..g {
                    let len = interleaver.block_len(b);
                    let mut mask = 0usize;
                    for pos in 0..len {
                        let sc = interleaver.subcarrier(b, pos).expect("position within block");
                        if sc >= off && sc < off + j_tot {
                            mask |= 1 << pos;
                        }
                    }
                    *weights.entry((len, mask)).or_default() += w;
                }
            }
        }
        JammingPattern::Random => {
            let denom = ln_choose(k, j_tot);
            for b in 0..g {
                let len = interleaver.block_len(b);
                for mask in 0usize..(1 << len) {
                    let j = mask.count_ones() as usize;
                    if j > j_tot || j_tot - j > k - len {
                        continue;
                    }
                    let w = (ln_choose(k - len, j_tot - j) - denom).exp() / g as f64;
                    *weights.entry((len, mask)).or_default() += w;
                }
            }
        }
    }
    let mut total = 0.0;
    for (&(len, mask), &w) in &weights {
        let c: Vec<bool> = (0..len).map(|i| (mask >> i) & 1 == 1).collect();
        total += w * ber_upper(cb, &c, sigma_w2, sigma_z2, &rho)?.value;
    }
    Ok(total)
}
