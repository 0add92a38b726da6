//! Monte Carlo BER estimation.
//!
//! A trial is one coherence block of `T` OFDM symbols. Every random draw of
//! trial `i` comes from substreams keyed by `(seed, i)`, so a trial's outcome
//! does not depend on which worker runs it. Trials are executed in batches
//! and their results are folded in trial order; the stopping rule therefore
//! stops at the same trial for any degree of parallelism.

use std::time::Instant;

use num_complex::Complex64;

use crate::adaptive::{draw_values, run_adaptive, AdaptiveOptions};
use crate::baselines::{OfdmIm, OfdmImConfig, QamOfdm};
use crate::channel::{stream, StreamRole};
use crate::constellation::Constellation;
use crate::detect::{approx_mld, full_mld, lowcomp_unchecked};
use crate::error::{Error, Result};
use crate::frame::SystemConfig;
use crate::harness::scenario::{Detector, Framework, Order, Scenario};
use crate::link::{CoherenceBlock, Link};
use crate::spreading::Codebook;

/// Trials evaluated per batch.
pub const BATCH_TRIALS: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialResult {
    pub bits_sent: u64,
    pub bit_errors: u64,
}

#[derive(Debug, Clone)]
enum Engine {
    Spread { cb: Codebook, detector: Detector },
    Adaptive { force_order: Option<usize> },
    Qam(QamOfdm),
    Im(OfdmIm),
}

/// A validated scenario with its codebooks and modulators built once.
#[derive(Debug, Clone)]
pub struct TrialRunner {
    scenario: Scenario,
    cfg: SystemConfig,
    engine: Engine,
}

impl TrialRunner {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let cfg = scenario.system_config()?;
        let fixed = match scenario.order {
            Order::Fixed(m) => Some(m),
            Order::Auto => None,
        };
        let engine = match scenario.framework {
            Framework::AjOfdm => Engine::Spread {
                cb: Codebook::for_order(cfg.p, cfg.n, cfg.m)?,
                detector: scenario.detector.unwrap_or(Detector::Lowcomp),
            },
            Framework::AjOfdmAdapt => Engine::Adaptive { force_order: fixed },
            Framework::QamOfdm => Engine::Qam(QamOfdm::new(cfg.p, cfg.n, Constellation::for_order(cfg.m)?)?),
            Framework::OfdmIm => {
                let m = fixed.ok_or_else(|| Error::Scenario("OFDM-IM needs a fixed order".into()))?;
                Engine::Im(OfdmIm::new(OfdmImConfig::new(cfg.n, scenario.n_a.unwrap_or(1), m)?)?)
            }
        };
        Ok(Self {
            scenario: scenario.clone(),
            cfg,
            engine,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    /// Simulates coherence block `trial` end to end.
    pub fn run(&self, trial: u64) -> Result<TrialResult> {
        let s = &self.scenario;
        let cfg = &self.cfg;
        let block = CoherenceBlock::for_trial(cfg, s.pattern, s.rho, s.seed, trial)?;
        let mut data = stream(s.seed, trial, StreamRole::Data);
        let mut noise = stream(s.seed, trial, StreamRole::Noise);
        if let Engine::Adaptive { force_order } = self.engine {
            let opts = AdaptiveOptions {
                force_order,
                ..AdaptiveOptions::default()
            };
            let out = run_adaptive(cfg, &block, &mut data, &mut noise, &opts)?;
            return Ok(TrialResult {
                bits_sent: out.bits_sent(),
                bit_errors: out.bit_errors(),
            });
        }

        let (n, g) = (cfg.n, cfg.g);
        let mut link = Link::new(cfg)?;
        let lens: Vec<usize> = (0..g).map(|b| link.interleaver().block_len(b)).collect();
        let mut tx = vec![Complex64::new(0.0, 0.0); g * n];
        let mut active: Vec<Vec<usize>> = vec![Vec::new(); g];
        let mut errors = 0u64;
        for t in 0..cfg.t {
            let values = draw_values(&mut data, cfg.p, g);
            for (b, &v) in values.iter().enumerate() {
                let out = &mut tx[b * n..(b + 1) * n];
                match &self.engine {
                    Engine::Spread { cb, .. } => out.copy_from_slice(cb.vector(v)),
                    Engine::Qam(q) => q.modulate_value(v, &mut data, out, &mut active[b]),
                    Engine::Im(im) => im.modulate_value(v, out),
                    Engine::Adaptive { .. } => unreachable!(),
                }
            }
            let (y, h) = link.transmit(&tx, &block, t, cfg.sigma_w2, &mut noise);
            for (b, &v) in values.iter().enumerate() {
                let (yb, hb) = (&y[b * n..(b + 1) * n], &h[b * n..(b + 1) * n]);
                let len = lens[b];
                let decided = match &self.engine {
                    Engine::Spread { cb, detector } => match detector {
                        Detector::Lowcomp => lowcomp_unchecked(&yb[..len], &hb[..len], cb, cfg.sigma_w2, cfg.sigma_z2).candidate,
                        Detector::Full => full_mld(&yb[..len], &hb[..len], cb, cfg.sigma_w2, cfg.sigma_z2)?.candidate,
                        Detector::Approx => approx_mld(&yb[..len], &hb[..len], cb, cfg.sigma_w2)?.candidate,
                    },
                    Engine::Qam(q) => q.detect_value(yb, hb, &active[b]),
                    Engine::Im(im) => im.detect_value(yb, hb, None),
                    Engine::Adaptive { .. } => unreachable!(),
                };
                errors += (v ^ decided).count_ones() as u64;
            }
        }
        Ok(TrialResult {
            bits_sent: (cfg.p * g * cfg.t) as u64,
            bit_errors: errors,
        })
    }
}

/// Runs one trial of `scenario`.
pub fn run_trial(scenario: &Scenario, trial: u64) -> Result<TrialResult> {
    TrialRunner::new(scenario)?.run(trial)
}

/// One measured point of a BER curve.
#[derive(Debug, Clone, PartialEq)]
pub struct BerCurvePoint {
    pub scenario: Scenario,
    pub trials: u64,
    pub bits_sent: u64,
    pub bit_errors: u64,
    pub ber: f64,
    /// Standard error of `ber`, from the spread of per-trial error counts.
    pub std_err: f64,
    pub runtime_ms: u64,
}

impl BerCurvePoint {
    fn from_counts(scenario: &Scenario, per_trial: &[TrialResult], runtime_ms: u64) -> Self {
        let trials = per_trial.len() as u64;
        let bits_sent: u64 = per_trial.iter().map(|r| r.bits_sent).sum();
        let bit_errors: u64 = per_trial.iter().map(|r| r.bit_errors).sum();
        let ber = if bits_sent == 0 { 0.0 } else { bit_errors as f64 / bits_sent as f64 };
        let std_err = if trials >= 2 {
            let per_bits = bits_sent as f64 / trials as f64;
            let rates: Vec<f64> = per_trial.iter().map(|r| r.bit_errors as f64 / per_bits).collect();
            let var = rates.iter().map(|x| (x - ber).powi(2)).sum::<f64>() / (trials - 1) as f64;
            (var / trials as f64).sqrt()
        } else if bits_sent > 0 {
            (ber * (1.0 - ber) / bits_sent as f64).sqrt()
        } else {
            0.0
        };
        Self {
            scenario: scenario.clone(),
            trials,
            bits_sent,
            bit_errors,
            ber,
            std_err,
            runtime_ms,
        }
    }
}

fn build_pool(parallelism: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {parallelism} workers: {e}")))
}

fn run_point(runner: &TrialRunner, pool: &rayon::ThreadPool) -> Result<BerCurvePoint> {
    use rayon::prelude::*;
    let s = runner.scenario();
    let started = Instant::now();
    let mut results: Vec<TrialResult> = Vec::new();
    let mut errors = 0u64;
    'outer: while (results.len() as u64) < s.max_trials {
        let start = results.len() as u64;
        let end = (start + BATCH_TRIALS).min(s.max_trials);
        let batch: Vec<Result<TrialResult>> = pool.install(|| (start..end).into_par_iter().map(|i| runner.run(i)).collect());
        for r in batch {
            let r = r?;
            errors += r.bit_errors;
            results.push(r);
            if results.len() as u64 >= s.min_trials && errors >= s.min_bit_errors {
                break 'outer;
            }
        }
    }
    Ok(BerCurvePoint::from_counts(s, &results, started.elapsed().as_millis() as u64))
}

/// Runs one scenario until its stopping rule is met.
pub fn run_scenario(scenario: &Scenario, parallelism: usize) -> Result<BerCurvePoint> {
    run_point(&TrialRunner::new(scenario)?, &build_pool(parallelism)?)
}

/// Runs every scenario in order, trials spread over `parallelism` workers.
pub fn run_sweep(scenarios: &[Scenario], parallelism: usize) -> Result<Vec<BerCurvePoint>> {
    if scenarios.is_empty() {
        return Ok(Vec::new());
    }
    let pool = build_pool(parallelism)?;
    scenarios
        .iter()
        .map(|s| run_point(&TrialRunner::new(s)?, &pool))
        .collect()
}

/// Like [`run_sweep`], handing each point to `sink` as soon as it is done.
pub fn run_sweep_with<F>(scenarios: &[Scenario], parallelism: usize, mut sink: F) -> Result<()>
where
    F: FnMut(BerCurvePoint) -> Result<()>,
{
    let pool = build_pool(parallelism)?;
    for s in scenarios {
        sink(run_point(&TrialRunner::new(s)?, &pool)?)?;
    }
    Ok(())
}
