//! Maximum-likelihood detection of spread blocks under partial jamming.
//!
//! Three detectors share one likelihood. For a block with residual
//! `e = y - H U s` and jamming indicator `c`, the per-block log-likelihood is
//!
//! ```text
//! log p(y | s, c) = -n ln(pi) - sum_i [ ln(c_i sz + sw) + |e_i|^2 / (c_i sz + sw) ]
//! ```
//!
//! * [`full_mld`] searches every `(s, c)` pair exhaustively.
//! * [`lowcomp_mld`] only searches the jammed count `J`: for a fixed `s` the
//!   best indicator of weight `J` marks the `J` largest residuals.
//! * [`approx_mld`] is the same search with the jamming variance replaced by
//!   a per-candidate estimate from the residual energy.
//!
//! All comparisons are made in the log domain. Ties resolve to the smallest
//! candidate index (symbol-index vector in lexicographic order), then the
//! smallest `J` or indicator value.
//!
//! Inputs `y` and `h` may be shorter than the block size `N`: only the first
//! `y.len()` rows of the spreading matrix are used. This is how zero-padded
//! entries of the final block are left out of every residual sum.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{self, Result};
use crate::spreading::{Codebook, SpreadingMatrix};

/// Largest block size accepted by [`full_mld`].
pub const FULL_MLD_MAX_N: usize = 16;
/// Largest symbol-vector alphabet accepted by [`full_mld`].
pub const FULL_MLD_MAX_CANDIDATES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    /// Detected symbol vector.
    pub s_hat: Vec<Complex64>,
    /// Codebook index of `s_hat`; equals the integer value of its bits.
    pub candidate: usize,
    /// Detected jamming indicator (full MLD only).
    pub c_hat: Option<Vec<bool>>,
    /// Detected number of jammed subcarriers.
    pub j_hat: usize,
    /// Log-likelihood of the decision, including all constant terms.
    pub log_likelihood: f64,
    /// Jamming variance used for the decision (given or estimated).
    pub sigma_z2_used: f64,
}

fn check_inputs(y: &[Complex64], h: &[Complex64], cb: &Codebook, sigma_w2: f64, sigma_z2: f64) -> Result<()> {
    if y.len() != h.len() || y.is_empty() || y.len() > cb.n_subcarriers() {
        return error::input(format!(
            "observation lengths y={} h={} incompatible with block size {}",
            y.len(),
            h.len(),
            cb.n_subcarriers()
        ));
    }
    if !(sigma_w2 > 0.0) || !(sigma_z2 >= 0.0) {
        return error::input(format!(
            "variances must satisfy sigma_w2 > 0, sigma_z2 >= 0 (got {sigma_w2}, {sigma_z2})"
        ));
    }
    Ok(())
}

/// Squared residual magnitudes `|y_i - h_i (U s_k)_i|^2` for `i < y.len()`.
pub fn residual_energies(y: &[Complex64], h: &[Complex64], x: &[Complex64], out: &mut [f64]) {
    for i in 0..y.len() {
        out[i] = (y[i] - h[i] * x[i]).norm_sqr();
    }
}

/// Block log-likelihood for residual energies and an indicator.
pub fn block_log_likelihood(residual_sq: &[f64], c: &[bool], sigma_w2: f64, sigma_z2: f64) -> f64 {
    let n = residual_sq.len() as f64;
    -n * PI.ln()
        - residual_sq
            .iter()
            .zip(c)
            .map(|(&r, &jammed)| {
                let v = if jammed { sigma_z2 + sigma_w2 } else { sigma_w2 };
                v.ln() + r / v
            })
            .sum::<f64>()
}

/// Log-likelihood of `y` for a modulated vector `x = U s` and indicator `c`.
pub fn log_likelihood(
    y: &[Complex64],
    h: &[Complex64],
    x: &[Complex64],
    c: &[bool],
    sigma_w2: f64,
    sigma_z2: f64,
) -> f64 {
    let mut r = vec![0.0; y.len()];
    residual_energies(y, h, x, &mut r);
    block_log_likelihood(&r, c, sigma_w2, sigma_z2)
}

/// Residual magnitudes sorted in descending order with the permutation that
/// produced them. Equal magnitudes keep their original order.
pub fn sort_residuals(e: &[Complex64]) -> (Vec<f64>, Vec<usize>) {
    let mags: Vec<f64> = e.iter().map(|z| z.norm()).collect();
    let perm = descending_order(&mags);
    (perm.iter().map(|&i| mags[i]).collect(), perm)
}

fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..values.len()).collect();
    perm.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    perm
}

/// Indicator marking the `j` largest residuals (stable on ties).
fn top_j_indicator(residual_sq: &[f64], j: usize) -> Vec<bool> {
    let mut c = vec![false; residual_sq.len()];
    for &i in descending_order(residual_sq).iter().take(j) {
        c[i] = true;
    }
    c
}

fn sort_desc(values: &mut [f64]) {
    values.sort_unstable_by(|a, b| b.total_cmp(a));
}

/// Exhaustive joint search over `X_M^S x {0,1}^n`.
///
/// Refuses blocks with more than [`FULL_MLD_MAX_N`] subcarriers or more than
/// [`FULL_MLD_MAX_CANDIDATES`] symbol vectors.
pub fn full_mld(
    y: &[Complex64],
    h: &[Complex64],
    cb: &Codebook,
    sigma_w2: f64,
    sigma_z2: f64,
) -> Result<DetectionResult> {
    check_inputs(y, h, cb, sigma_w2, sigma_z2)?;
    let n = y.len();
    if n > FULL_MLD_MAX_N || cb.len() > FULL_MLD_MAX_CANDIDATES {
        return error::config(format!(
            "full MLD search over {} symbol vectors x 2^{n} indicators exceeds the exhaustive budget",
            cb.len()
        ));
    }
    let penalty = (sigma_z2 / sigma_w2 + 1.0).ln();
    let (w0, w1) = (1.0 / sigma_w2, 1.0 / (sigma_z2 + sigma_w2));
    let mut r = vec![0.0; n];
    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    for k in 0..cb.len() {
        residual_energies(y, h, cb.vector(k), &mut r);
        for c in 0..(1usize << n) {
            let mut obj = -(c.count_ones() as f64) * penalty;
            for (i, &ri) in r.iter().enumerate() {
                obj -= ri * if (c >> i) & 1 == 1 { w1 } else { w0 };
            }
            if obj > best.0 {
                best = (obj, k, c);
            }
        }
    }
    let (_, k, c) = best;
    let c_hat: Vec<bool> = (0..n).map(|i| (c >> i) & 1 == 1).collect();
    residual_energies(y, h, cb.vector(k), &mut r);
    Ok(DetectionResult {
        s_hat: cb.symbols(k),
        candidate: k,
        j_hat: c.count_ones() as usize,
        log_likelihood: block_log_likelihood(&r, &c_hat, sigma_w2, sigma_z2),
        c_hat: Some(c_hat),
        sigma_z2_used: sigma_z2,
    })
}

/// Sorted-residual search with known jamming variance.
///
/// For each `J = 0..=n` the symbol vector minimizing the weighted sorted
/// residual is found, then `J` is chosen by likelihood.
pub fn lowcomp_mld(
    y: &[Complex64],
    h: &[Complex64],
    cb: &Codebook,
    sigma_w2: f64,
    sigma_z2: f64,
) -> Result<DetectionResult> {
    check_inputs(y, h, cb, sigma_w2, sigma_z2)?;
    Ok(lowcomp_unchecked(y, h, cb, sigma_w2, sigma_z2))
}

pub(crate) fn lowcomp_unchecked(
    y: &[Complex64],
    h: &[Complex64],
    cb: &Codebook,
    sigma_w2: f64,
    sigma_z2: f64,
) -> DetectionResult {
    let n = y.len();
    let (w0, w1) = (1.0 / sigma_w2, 1.0 / (sigma_z2 + sigma_w2));
    let mut r = vec![0.0; n];
    // best (cost, candidate) per J
    let mut best = vec![(f64::INFINITY, 0usize); n + 1];
    for k in 0..cb.len() {
        residual_energies(y, h, cb.vector(k), &mut r);
        sort_desc(&mut r);
        let total: f64 = r.iter().sum();
        let mut head = 0.0;
        for (j, slot) in best.iter_mut().enumerate() {
            if j > 0 {
                head += r[j - 1];
            }
            let cost = w0 * total - (w0 - w1) * head;
            if cost < slot.0 {
                *slot = (cost, k);
            }
        }
    }
    let penalty = (sigma_z2 / sigma_w2 + 1.0).ln();
    let mut j_hat = 0;
    let mut best_obj = f64::NEG_INFINITY;
    for (j, &(cost, _)) in best.iter().enumerate() {
        let obj = -(j as f64) * penalty - cost;
        if obj > best_obj {
            best_obj = obj;
            j_hat = j;
        }
    }
    let k = best[j_hat].1;
    finish(y, h, cb, k, j_hat, sigma_w2, sigma_z2, false)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    y: &[Complex64],
    h: &[Complex64],
    cb: &Codebook,
    k: usize,
    j_hat: usize,
    sigma_w2: f64,
    sigma_z2: f64,
    with_indicator: bool,
) -> DetectionResult {
    let mut r = vec![0.0; y.len()];
    residual_energies(y, h, cb.vector(k), &mut r);
    let c = top_j_indicator(&r, j_hat);
    DetectionResult {
        s_hat: cb.symbols(k),
        candidate: k,
        log_likelihood: block_log_likelihood(&r, &c, sigma_w2, sigma_z2),
        c_hat: with_indicator.then_some(c),
        j_hat,
        sigma_z2_used: sigma_z2,
    }
}

/// Least-squares symbol decision, i.e. the `J = 0` branch.
pub fn conventional_mld(y: &[Complex64], h: &[Complex64], cb: &Codebook) -> usize {
    let mut r = vec![0.0; y.len()];
    let mut best = (f64::INFINITY, 0);
    for k in 0..cb.len() {
        residual_energies(y, h, cb.vector(k), &mut r);
        let d: f64 = r.iter().sum();
        if d < best.0 {
            best = (d, k);
        }
    }
    best.1
}

/// Jamming variance implied by the residual energy of a hypothesis with `j`
/// jammed subcarriers: `max((||e||^2 - n sw) / j, 0)`, and 0 when `j = 0`.
pub fn estimate_from_residual(residual_energy: f64, n: usize, j: usize, sigma_w2: f64) -> f64 {
    if j == 0 {
        0.0
    } else {
        ((residual_energy - n as f64 * sigma_w2) / j as f64).max(0.0)
    }
}

/// [`estimate_from_residual`] for the residual of symbol vector `s`.
pub fn estimate_sigma_z2(
    y: &[Complex64],
    h: &[Complex64],
    sm: &SpreadingMatrix,
    s: &[Complex64],
    j: usize,
    sigma_w2: f64,
) -> Result<f64> {
    if y.len() != h.len() || y.len() > sm.n_subcarriers() || s.len() != sm.n_symbols() {
        return error::input("observation or symbol vector does not match the spreading matrix");
    }
    if j > y.len() {
        return error::input(format!("J={j} exceeds block size {}", y.len()));
    }
    let x = sm.apply(s);
    let energy: f64 = (0..y.len()).map(|i| (y[i] - h[i] * x[i]).norm_sqr()).sum();
    Ok(estimate_from_residual(energy, y.len(), j, sigma_w2))
}

/// Joint `(s, J)` search where each hypothesis uses the variance returned by
/// `variance(residual_energy, J)`.
pub fn sorted_search_with<F>(
    y: &[Complex64],
    h: &[Complex64],
    cb: &Codebook,
    sigma_w2: f64,
    variance: F,
) -> Result<DetectionResult>
where
    F: Fn(f64, usize) -> f64,
{
    check_inputs(y, h, cb, sigma_w2, 0.0)?;
    let n = y.len();
    let w0 = 1.0 / sigma_w2;
    let mut r = vec![0.0; n];
    let mut best = (f64::NEG_INFINITY, 0usize, 0usize, 0.0f64);
    for k in 0..cb.len() {
        residual_energies(y, h, cb.vector(k), &mut r);
        sort_desc(&mut r);
        let total: f64 = r.iter().sum();
        let mut head = 0.0;
        for j in 0..=n {
            if j > 0 {
                head += r[j - 1];
            }
            let sz = variance(total, j);
            let obj = -(j as f64) * (sz / sigma_w2 + 1.0).ln() - (w0 * total - (w0 - 1.0 / (sz + sigma_w2)) * head);
            if obj > best.0 {
                best = (obj, k, j, sz);
            }
        }
    }
    let (_, k, j, sz) = best;
    Ok(finish(y, h, cb, k, j, sigma_w2, sz, false))
}

/// Sorted-residual search without knowledge of the jamming variance; each
/// `(s, J)` hypothesis uses its own residual-based variance estimate.
pub fn approx_mld(y: &[Complex64], h: &[Complex64], cb: &Codebook, sigma_w2: f64) -> Result<DetectionResult> {
    let n = y.len();
    sorted_search_with(y, h, cb, sigma_w2, |energy, j| {
        estimate_from_residual(energy, n, j, sigma_w2)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::complex_gaussian;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    struct Instance {
        y: Vec<Complex64>,
        h: Vec<Complex64>,
        k: usize,
        c: Vec<bool>,
    }

    fn instance(rng: &mut ChaCha8Rng, cb: &Codebook, sigma_w2: f64, sigma_z2: f64, p_jam: f64) -> Instance {
        let n = cb.n_subcarriers();
        let k = rng.random_range(0..cb.len());
        let h: Vec<Complex64> = (0..n).map(|_| complex_gaussian(rng, 1.0)).collect();
        let c: Vec<bool> = (0..n).map(|_| rng.random_bool(p_jam)).collect();
        let x = cb.vector(k);
        let y = (0..n)
            .map(|i| {
                let mut v = h[i] * x[i] + complex_gaussian(rng, sigma_w2);
                if c[i] {
                    v += complex_gaussian(rng, sigma_z2);
                }
                v
            })
            .collect();
        Instance { y, h, k, c }
    }

    /// Independent brute-force oracle: joint likelihood over every (s, c),
    /// built from the raw spreading matrix rather than the codebook.
    fn oracle(inst: &Instance, cb: &Codebook, sw: f64, sz: f64) -> (f64, usize, usize) {
        let n = inst.y.len();
        let mut best = (f64::NEG_INFINITY, 0, 0);
        for k in 0..cb.len() {
            let x = cb.spreading().apply(&cb.symbols(k));
            for c in 0..(1usize << n) {
                let ind: Vec<bool> = (0..n).map(|i| (c >> i) & 1 == 1).collect();
                let mut ll = 0.0;
                for i in 0..n {
                    let v = if ind[i] { sz + sw } else { sw };
                    let e = (inst.y[i] - inst.h[i] * x[i]).norm_sqr();
                    ll += -(PI * v).ln() - e / v;
                }
                if ll > best.0 + 1e-12 {
                    best = (ll, k, c);
                }
            }
        }
        best
    }

    #[test]
    fn scalar_likelihood_value() {
        let ll = log_likelihood(&[cx(0.0, 0.0)], &[cx(1.0, 0.0)], &[cx(1.0, 0.0)], &[true], 1.0, 1.0);
        let want = -(2.0 * PI).ln() - 0.5;
        assert!((ll - want).abs() < 1e-12);
        assert!((ll + 2.3379).abs() < 1e-4);
    }

    #[test]
    fn sort_residual_examples() {
        let (m, p) = sort_residuals(&[cx(1.0, 0.0), cx(0.0, 3.0), cx(-2.0, 0.0)]);
        assert_eq!(p, vec![1, 2, 0]);
        for (a, b) in m.iter().zip([3.0, 2.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let (_, p) = sort_residuals(&[cx(1.0, 0.0), cx(-1.0, 0.0)]);
        assert_eq!(p, vec![0, 1]);
    }

    #[test]
    fn full_mld_without_jamming_picks_zero_indicator() {
        let cb = Codebook::for_order(4, 4, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let inst = instance(&mut rng, &cb, 0.1, 0.0, 0.0);
            let d = full_mld(&inst.y, &inst.h, &cb, 0.1, 0.0).unwrap();
            assert_eq!(d.c_hat.as_deref(), Some(&[false; 4][..]));
            assert_eq!(d.j_hat, 0);
            assert_eq!(d.candidate, conventional_mld(&inst.y, &inst.h, &cb));
        }
    }

    #[test]
    fn noiseless_jam_free_is_exact() {
        let cb = Codebook::for_order(4, 4, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let inst = instance(&mut rng, &cb, 0.0, 0.0, 0.0);
            let d = full_mld(&inst.y, &inst.h, &cb, 1e-3, 1.0).unwrap();
            assert_eq!(d.candidate, inst.k);
            let lc = lowcomp_mld(&inst.y, &inst.h, &cb, 1e-3, 1.0).unwrap();
            assert_eq!(lc.candidate, inst.k);
            assert_eq!(lc.j_hat, 0);
        }
    }

    #[test]
    fn full_mld_matches_brute_force_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (p, n, m) in [(4usize, 4usize, 4usize), (4, 4, 2), (4, 4, 16), (6, 6, 8), (2, 3, 4)] {
            let cb = Codebook::for_order(p, n, m).unwrap();
            for _ in 0..40 {
                let inst = instance(&mut rng, &cb, 0.05, 20.0, 0.4);
                let d = full_mld(&inst.y, &inst.h, &cb, 0.05, 20.0).unwrap();
                let (ll, k, _) = oracle(&inst, &cb, 0.05, 20.0);
                assert!((d.log_likelihood - ll).abs() < 1e-9);
                assert_eq!(d.candidate, k);
            }
        }
    }

    #[test]
    fn full_mld_refuses_oversized_search() {
        let cb = Codebook::for_order(4, 17, 4).unwrap();
        let y = vec![cx(0.0, 0.0); 17];
        assert!(matches!(full_mld(&y, &y, &cb, 1.0, 1.0), Err(crate::Error::Config(_))));
    }

    #[test]
    fn lowcomp_equals_full_on_random_blocks() {
        let cb = Codebook::for_order(4, 4, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..2000 {
            let inst = instance(&mut rng, &cb, 0.01, 100.0, 0.5);
            let full = full_mld(&inst.y, &inst.h, &cb, 0.01, 100.0).unwrap();
            let low = lowcomp_mld(&inst.y, &inst.h, &cb, 0.01, 100.0).unwrap();
            assert!((full.log_likelihood - low.log_likelihood).abs() < 1e-9);
            assert_eq!(full.candidate, low.candidate);
            assert_eq!(full.j_hat, low.j_hat);
        }
    }

    #[test]
    fn lowcomp_zero_branch_is_least_squares() {
        // with sigma_z2 = 0 every J has the same cost; J = 0 wins the tie
        let cb = Codebook::for_order(4, 4, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let inst = instance(&mut rng, &cb, 0.3, 0.0, 0.0);
            let d = lowcomp_mld(&inst.y, &inst.h, &cb, 0.3, 0.0).unwrap();
            assert_eq!(d.j_hat, 0);
            assert_eq!(d.candidate, conventional_mld(&inst.y, &inst.h, &cb));
        }
    }

    #[test]
    fn single_strong_jammer_is_located() {
        let cb = Codebook::for_order(4, 4, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let mut inst = instance(&mut rng, &cb, 0.0, 0.0, 0.0);
            inst.y[2] += cx(1e3, 0.0);
            let d = lowcomp_mld(&inst.y, &inst.h, &cb, 1e-4, 1e6).unwrap();
            assert_eq!(d.j_hat, 1);
            assert_eq!(d.candidate, inst.k);
            let x = cb.vector(d.candidate);
            let e: Vec<Complex64> = (0..4).map(|i| inst.y[i] - inst.h[i] * x[i]).collect();
            assert_eq!(sort_residuals(&e).1[0], 2);

            let a = approx_mld(&inst.y, &inst.h, &cb, 1e-4).unwrap();
            assert_eq!(a.j_hat, 1);
            assert_eq!(a.candidate, inst.k);
        }
    }

    #[test]
    fn estimate_sigma_z2_examples() {
        let sm = SpreadingMatrix::new(4, 1).unwrap();
        let s = [cx(1.0, 0.0)];
        let h = vec![cx(1.0, 0.0); 4];
        // y = U s + e with ||e||^2 = N sw + 50 = 4 * 0.5 + 50
        let extra = (52.0f64 / 4.0).sqrt();
        let y: Vec<Complex64> = sm.apply(&s).iter().map(|v| v + cx(extra, 0.0)).collect();
        assert_eq!(estimate_sigma_z2(&y, &h, &sm, &s, 0, 0.5).unwrap(), 0.0);
        assert!((estimate_sigma_z2(&y, &h, &sm, &s, 2, 0.5).unwrap() - 25.0).abs() < 1e-9);
        let y_at_noise: Vec<Complex64> = sm.apply(&s).iter().map(|v| v + cx(0.5f64.sqrt(), 0.0)).collect();
        assert_eq!(estimate_sigma_z2(&y_at_noise, &h, &sm, &s, 2, 0.5).unwrap(), 0.0);
        assert!(estimate_sigma_z2(&y, &h, &sm, &s, 5, 0.5).is_err());
    }

    #[test]
    fn approx_without_jamming_is_conventional() {
        let cb = Codebook::for_order(4, 4, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let inst = instance(&mut rng, &cb, 0.01, 0.0, 0.0);
            let a = approx_mld(&inst.y, &inst.h, &cb, 0.01).unwrap();
            assert_eq!(a.candidate, conventional_mld(&inst.y, &inst.h, &cb));
        }
    }

    #[test]
    fn approx_with_true_variance_reproduces_lowcomp() {
        let cb = Codebook::for_order(4, 4, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..2000 {
            let inst = instance(&mut rng, &cb, 0.01, 100.0, 0.3);
            let forced = sorted_search_with(&inst.y, &inst.h, &cb, 0.01, |_, _| 100.0).unwrap();
            let low = lowcomp_mld(&inst.y, &inst.h, &cb, 0.01, 100.0).unwrap();
            assert_eq!(forced.candidate, low.candidate);
            assert_eq!(forced.j_hat, low.j_hat);
            assert_eq!(forced.log_likelihood, low.log_likelihood);
        }
    }

    #[test]
    fn approx_agrees_with_lowcomp_under_strong_jamming() {
        let cb = Codebook::for_order(4, 4, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let trials = 10_000;
        let agree = (0..trials)
            .filter(|_| {
                let inst = instance(&mut rng, &cb, 0.01, 100.0, 0.25);
                let a = approx_mld(&inst.y, &inst.h, &cb, 0.01).unwrap();
                let l = lowcomp_mld(&inst.y, &inst.h, &cb, 0.01, 100.0).unwrap();
                a.candidate == l.candidate
            })
            .count();
        assert!(agree as f64 >= 0.95 * trials as f64, "{agree}/{trials}");
    }

    #[test]
    fn sorted_assignment_beats_every_other_subset() {
        // exhaustive over all J-subsets for N <= 6
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for n in 1..=6usize {
            for _ in 0..50 {
                let r: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 10.0).collect();
                let (w0, w1) = (1.0 / 0.1, 1.0 / 30.1);
                for j in 0..=n {
                    let c = top_j_indicator(&r, j);
                    let cost = |c: &[bool]| -> f64 { r.iter().zip(c).map(|(v, &b)| v * if b { w1 } else { w0 }).sum() };
                    let sorted_cost = cost(&c);
                    for mask in 0..(1usize << n) {
                        if mask.count_ones() as usize != j {
                            continue;
                        }
                        let other: Vec<bool> = (0..n).map(|i| (mask >> i) & 1 == 1).collect();
                        assert!(sorted_cost <= cost(&other) + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn padded_rows_are_ignored() {
        // a 2-entry final block decodes from the first two rows only
        let cb = Codebook::for_order(2, 4, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let inst = instance(&mut rng, &cb, 0.0, 0.0, 0.0);
            let d = lowcomp_mld(&inst.y[..2], &inst.h[..2], &cb, 1e-3, 10.0).unwrap();
            assert_eq!(d.candidate, inst.k);
        }
    }

    #[test]
    fn detectors_are_deterministic() {
        let cb = Codebook::for_order(4, 4, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let inst = instance(&mut rng, &cb, 0.01, 100.0, 0.5);
        assert_eq!(
            full_mld(&inst.y, &inst.h, &cb, 0.01, 100.0).unwrap(),
            full_mld(&inst.y, &inst.h, &cb, 0.01, 100.0).unwrap()
        );
        assert_eq!(approx_mld(&inst.y, &inst.h, &cb, 0.01).unwrap(), approx_mld(&inst.y, &inst.h, &cb, 0.01).unwrap());
        let _ = inst.c;
    }
}
