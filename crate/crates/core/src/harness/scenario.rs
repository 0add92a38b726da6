//! Scenario definitions and their TOML representation.
//!
//! A scenario file holds one table per scenario; the table name is the
//! scenario id:
//!
//! ```toml
//! [pb_snr25]
//! framework = "AJ-OFDM"
//! detector = "lowcomp"
//! M = 4
//! pattern = "partial_band"
//! rho = 0.5
//! snr_db = 25
//! sjr_db = -20
//! ```
//!
//! `K`, `N`, `p` and `T` default to 512, 4, 4 and 28. Unknown keys are
//! rejected.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::OfdmImConfig;
use crate::channel::{snr_sjr_to_variances, JammingPattern};
use crate::constellation::Constellation;
use crate::detect::{FULL_MLD_MAX_CANDIDATES, FULL_MLD_MAX_N};
use crate::error::{Error, Result};
use crate::frame::SystemConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Framework {
    #[serde(rename = "AJ-OFDM")]
    AjOfdm,
    #[serde(rename = "AJ-OFDM-Adapt")]
    AjOfdmAdapt,
    #[serde(rename = "QAM-OFDM")]
    QamOfdm,
    #[serde(rename = "OFDM-IM")]
    OfdmIm,
}

impl Framework {
    pub fn as_str(self) -> &'static str {
        match self {
            Framework::AjOfdm => "AJ-OFDM",
            Framework::AjOfdmAdapt => "AJ-OFDM-Adapt",
            Framework::QamOfdm => "QAM-OFDM",
            Framework::OfdmIm => "OFDM-IM",
        }
    }
}

impl fmt::Display for Framework {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Detector used by AJ-OFDM. `Full` and `Lowcomp` are given the true
/// jamming variance; `Approx` estimates it per block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Detector {
    Lowcomp,
    Full,
    Approx,
}

/// Modulation order: fixed, or chosen at run time by the adaptive framework.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    Fixed(usize),
    Auto,
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Fixed(m) => write!(f, "{m}"),
            Order::Auto => f.write_str("auto"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum RawOrder {
    Fixed(usize),
    Named(String),
}

fn default_k() -> usize {
    512
}
fn default_n() -> usize {
    4
}
fn default_p() -> usize {
    4
}
fn default_t() -> usize {
    28
}
fn default_seed() -> u64 {
    1
}
fn default_min_trials() -> u64 {
    1
}
fn default_min_bit_errors() -> u64 {
    100
}
fn default_max_trials() -> u64 {
    100_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    framework: Framework,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    detector: Option<Detector>,
    #[serde(rename = "K", default = "default_k")]
    k: usize,
    #[serde(rename = "N", default = "default_n")]
    n: usize,
    #[serde(default = "default_p")]
    p: usize,
    #[serde(rename = "M")]
    m: RawOrder,
    #[serde(rename = "N_A", skip_serializing_if = "Option::is_none", default)]
    n_a: Option<usize>,
    #[serde(rename = "T", default = "default_t")]
    t: usize,
    #[serde(rename = "T_e", skip_serializing_if = "Option::is_none", default)]
    t_e: Option<usize>,
    pattern: JammingPattern,
    rho: f64,
    snr_db: f64,
    sjr_db: f64,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default = "default_min_trials")]
    min_trials: u64,
    #[serde(default = "default_min_bit_errors")]
    min_bit_errors: u64,
    #[serde(default = "default_max_trials")]
    max_trials: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub framework: Framework,
    /// AJ-OFDM only.
    pub detector: Option<Detector>,
    pub k: usize,
    pub n: usize,
    pub p: usize,
    pub order: Order,
    /// OFDM-IM only.
    pub n_a: Option<usize>,
    pub t: usize,
    /// AJ-OFDM-Adapt only.
    pub t_e: Option<usize>,
    pub pattern: JammingPattern,
    pub rho: f64,
    pub snr_db: f64,
    pub sjr_db: f64,
    pub seed: u64,
    pub min_trials: u64,
    pub min_bit_errors: u64,
    pub max_trials: u64,
}

impl Scenario {
    /// A scenario with the default dimensions and stopping rule.
    pub fn new(
        id: impl Into<String>,
        framework: Framework,
        order: Order,
        pattern: JammingPattern,
        rho: f64,
        snr_db: f64,
        sjr_db: f64,
    ) -> Self {
        Self {
            id: id.into(),
            framework,
            detector: (framework == Framework::AjOfdm).then_some(Detector::Lowcomp),
            k: default_k(),
            n: default_n(),
            p: default_p(),
            order,
            n_a: None,
            t: default_t(),
            t_e: None,
            pattern,
            rho,
            snr_db,
            sjr_db,
            seed: default_seed(),
            min_trials: default_min_trials(),
            min_bit_errors: default_min_bit_errors(),
            max_trials: default_max_trials(),
        }
    }

    fn invalid<T>(&self, msg: impl fmt::Display) -> Result<T> {
        Err(Error::Scenario(format!("scenario '{}': {msg}", self.id)))
    }

    /// Noise and jamming variances.
    pub fn variances(&self) -> (f64, f64) {
        snr_sjr_to_variances(self.snr_db, self.sjr_db)
    }

    /// Link configuration. The adaptive framework starts from 4-QAM.
    pub fn system_config(&self) -> Result<SystemConfig> {
        let (sw, sz) = self.variances();
        // index modulation splits p itself; a binary alphabet keeps S = p valid
        let m = match (self.framework, self.order) {
            (Framework::OfdmIm, _) => 2,
            (_, Order::Fixed(m)) => m,
            (_, Order::Auto) => 4,
        };
        SystemConfig::new(self.k, self.n, self.p, m, self.t, self.t_e.unwrap_or(0), sw, sz)
            .map_err(|e| Error::Scenario(format!("scenario '{}': {e}", self.id)))
    }

    pub fn bits_per_trial(&self) -> u64 {
        (self.p * self.k.div_ceil(self.n) * self.t) as u64
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() || self.id.contains(',') || self.id.contains('"') {
            return self.invalid("ids must be nonempty and free of commas and quotes");
        }
        // scenario files store integers as signed 64-bit
        if self.seed > i64::MAX as u64 || self.max_trials > i64::MAX as u64 || self.min_bit_errors > i64::MAX as u64 {
            return self.invalid("seed, max_trials and min_bit_errors must not exceed 2^63 - 1");
        }
        if self.min_trials == 0 || self.max_trials < self.min_trials {
            return self.invalid(format!(
                "need 1 <= min_trials <= max_trials (got {} and {})",
                self.min_trials, self.max_trials
            ));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return self.invalid(format!("rho={} outside [0, 1]", self.rho));
        }
        if !self.snr_db.is_finite() || !self.sjr_db.is_finite() {
            return self.invalid("SNR and SJR must be finite");
        }
        if self.k == 0 || self.n == 0 || self.n > self.k || self.t == 0 || self.p == 0 {
            return self.invalid("need K, N, p, T >= 1 and N <= K");
        }
        if self.p > 24 {
            return self.invalid(format!("p={} exceeds the 24-bit block limit", self.p));
        }
        match (self.framework, self.detector) {
            (Framework::AjOfdm, None) => return self.invalid("AJ-OFDM needs a detector (lowcomp, full or approx)"),
            (Framework::AjOfdm, _) => {}
            (_, Some(_)) => return self.invalid("detector applies to AJ-OFDM only"),
            _ => {}
        }
        if self.n_a.is_some() != (self.framework == Framework::OfdmIm) {
            return self.invalid("N_A is required for OFDM-IM and not allowed otherwise");
        }
        if self.t_e.is_some() != (self.framework == Framework::AjOfdmAdapt) {
            return self.invalid("T_e is required for AJ-OFDM-Adapt and not allowed otherwise");
        }
        let m = match self.order {
            Order::Auto if self.framework != Framework::AjOfdmAdapt => {
                return self.invalid("M = \"auto\" is only valid for AJ-OFDM-Adapt")
            }
            Order::Auto => None,
            Order::Fixed(m) => {
                Constellation::for_order(m).map_err(|e| Error::Scenario(format!("scenario '{}': {e}", self.id)))?;
                Some(m)
            }
        };
        let bps = m.map(|m| m.trailing_zeros() as usize);
        match self.framework {
            Framework::AjOfdm | Framework::QamOfdm => {
                let bps = bps.unwrap_or(1);
                if !self.p.is_multiple_of(bps) || self.p / bps > self.n {
                    return self.invalid(format!(
                        "p={} bits need S=p/log2(M) to be an integer no larger than N={}",
                        self.p, self.n
                    ));
                }
                if self.detector == Some(Detector::Full)
                    && (self.n > FULL_MLD_MAX_N || (1usize << self.p) > FULL_MLD_MAX_CANDIDATES)
                {
                    return self.invalid("full MLD is limited to N <= 16 and 2^20 candidates");
                }
            }
            Framework::AjOfdmAdapt => {
                let t_e = self.t_e.unwrap_or(0);
                if !self.p.is_multiple_of(2) || self.p / 2 > self.n {
                    return self.invalid("adaptive operation starts with 4-QAM and needs an even p <= 2N");
                }
                if t_e == 0 || t_e > self.t {
                    return self.invalid(format!("need 1 <= T_e <= T (T_e={t_e}, T={})", self.t));
                }
                if let Some(b) = bps {
                    if !self.p.is_multiple_of(b) || self.p / b > self.n {
                        return self.invalid(format!("order M={} cannot carry p={} bits on N={}", 1 << b, self.p, self.n));
                    }
                }
            }
            Framework::OfdmIm => {
                let cfg = OfdmImConfig::new(self.n, self.n_a.unwrap_or(0), m.unwrap_or(2))
                    .map_err(|e| Error::Scenario(format!("scenario '{}': {e}", self.id)))?;
                if cfg.bits_per_block() != self.p {
                    return self.invalid(format!(
                        "OFDM-IM with N={}, N_A={}, M={} carries {} bits, not p={}",
                        self.n,
                        cfg.n_a,
                        cfg.m,
                        cfg.bits_per_block(),
                        self.p
                    ));
                }
            }
        }
        Ok(())
    }

    fn to_raw(&self) -> RawScenario {
        RawScenario {
            framework: self.framework,
            detector: self.detector,
            k: self.k,
            n: self.n,
            p: self.p,
            m: match self.order {
                Order::Fixed(m) => RawOrder::Fixed(m),
                Order::Auto => RawOrder::Named("auto".into()),
            },
            n_a: self.n_a,
            t: self.t,
            t_e: self.t_e,
            pattern: self.pattern,
            rho: self.rho,
            snr_db: self.snr_db,
            sjr_db: self.sjr_db,
            seed: self.seed,
            min_trials: self.min_trials,
            min_bit_errors: self.min_bit_errors,
            max_trials: self.max_trials,
        }
    }

    fn from_raw(id: &str, raw: RawScenario) -> Result<Self> {
        let order = match raw.m {
            RawOrder::Fixed(m) => Order::Fixed(m),
            RawOrder::Named(s) if s == "auto" => Order::Auto,
            RawOrder::Named(s) => {
                return Err(Error::Scenario(format!("scenario '{id}': M must be an integer or \"auto\", got \"{s}\"")))
            }
        };
        let s = Self {
            id: id.to_string(),
            framework: raw.framework,
            detector: raw.detector,
            k: raw.k,
            n: raw.n,
            p: raw.p,
            order,
            n_a: raw.n_a,
            t: raw.t,
            t_e: raw.t_e,
            pattern: raw.pattern,
            rho: raw.rho,
            snr_db: raw.snr_db,
            sjr_db: raw.sjr_db,
            seed: raw.seed,
            min_trials: raw.min_trials,
            min_bit_errors: raw.min_bit_errors,
            max_trials: raw.max_trials,
        };
        s.validate()?;
        Ok(s)
    }
}

/// Parses and validates every scenario of a TOML document, in file order.
pub fn parse_scenarios(text: &str) -> Result<Vec<Scenario>> {
    let table: toml::Table = toml::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
    let mut out = Vec::with_capacity(table.len());
    for (id, value) in table {
        if !value.is_table() {
            return Err(Error::Scenario(format!("'{id}' is not a table; every scenario is a [section]")));
        }
        let raw: RawScenario = value
            .try_into()
            .map_err(|e: toml::de::Error| Error::Scenario(format!("scenario '{id}': {}", e.message())))?;
        out.push(Scenario::from_raw(&id, raw)?);
    }
    Ok(out)
}

pub fn load_scenarios(path: &Path) -> Result<Vec<Scenario>> {
    parse_scenarios(&std::fs::read_to_string(path)?)
}

/// Serializes scenarios to the TOML form accepted by [`parse_scenarios`].
pub fn scenarios_to_toml(scenarios: &[Scenario]) -> Result<String> {
    let mut table = toml::Table::new();
    for s in scenarios {
        let value = toml::Value::try_from(s.to_raw()).map_err(|e| Error::Scenario(e.to_string()))?;
        if table.insert(s.id.clone(), value).is_some() {
            return Err(Error::Scenario(format!("duplicate scenario id '{}'", s.id)));
        }
    }
    toml::to_string(&table).map_err(|e| Error::Scenario(e.to_string()))
}
