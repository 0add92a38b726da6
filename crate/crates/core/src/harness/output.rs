//! CSV persistence of BER curve points and analytical bound rows.
//!
//! One row per scenario. A writer opened on an existing file keeps its rows
//! and reports their ids, so an interrupted sweep can resume by skipping the
//! scenarios already present.

use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;

use crate::analysis::expected_ber_upper;
use crate::channel::jammed_count;
use crate::error::{Error, Result};
use crate::frame::Interleaver;
use crate::harness::scenario::{Framework, Scenario};
use crate::harness::sweep::BerCurvePoint;
use crate::spreading::Codebook;

pub const CSV_HEADER: [&str; 17] = [
    "scenario_id",
    "framework",
    "K",
    "N",
    "p",
    "M",
    "N_A",
    "pattern",
    "rho",
    "snr_db",
    "sjr_db",
    "seed",
    "trials",
    "bits_sent",
    "bit_errors",
    "ber",
    "runtime_ms",
];

/// Formats like C's `%.9g`.
pub fn fmt_g9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (8 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A result row: either a simulated point or an analytical bound.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub scenario_id: String,
    pub scenario: Scenario,
    pub trials: u64,
    pub bits_sent: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub runtime_ms: u64,
}

impl From<&BerCurvePoint> for CsvRow {
    fn from(p: &BerCurvePoint) -> Self {
        Self {
            scenario_id: p.scenario.id.clone(),
            scenario: p.scenario.clone(),
            trials: p.trials,
            bits_sent: p.bits_sent,
            bit_errors: p.bit_errors,
            ber: p.ber,
            runtime_ms: p.runtime_ms,
        }
    }
}

impl CsvRow {
    fn fields(&self, omit_runtime: bool) -> Vec<String> {
        let s = &self.scenario;
        vec![
            self.scenario_id.clone(),
            s.framework.to_string(),
            s.k.to_string(),
            s.n.to_string(),
            s.p.to_string(),
            s.order.to_string(),
            s.n_a.map(|a| a.to_string()).unwrap_or_default(),
            s.pattern.as_str().to_string(),
            fmt_g9(s.rho),
            fmt_g9(s.snr_db),
            fmt_g9(s.sjr_db),
            s.seed.to_string(),
            self.trials.to_string(),
            self.bits_sent.to_string(),
            self.bit_errors.to_string(),
            fmt_g9(self.ber),
            if omit_runtime { "0".into() } else { self.runtime_ms.to_string() },
        ]
    }
}

/// Appends rows to a results file, creating it with a header if needed.
pub struct CsvSink {
    writer: csv::Writer<File>,
    done: HashSet<String>,
    omit_runtime: bool,
}

impl CsvSink {
    /// Opens `path` for appending. Existing content must start with the
    /// expected header; its ids become [`CsvSink::contains`] hits.
    pub fn open(path: &Path, omit_runtime: bool) -> Result<Self> {
        let done = if path.exists() && std::fs::metadata(path)?.len() > 0 {
            existing_ids(path)?
        } else {
            File::create(path)?;
            HashSet::new()
        };
        let fresh = done.is_empty() && std::fs::metadata(path)?.len() == 0;
        let file = OpenOptions::new().append(true).open(path)?;
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        if fresh {
            writer.write_record(CSV_HEADER)?;
            writer.flush()?;
        }
        Ok(Self {
            writer,
            done,
            omit_runtime,
        })
    }

    pub fn contains(&self, id: &str) -> bool {
        self.done.contains(id)
    }

    /// Writes and flushes one row.
    pub fn write(&mut self, row: &CsvRow) -> Result<()> {
        self.writer.write_record(row.fields(self.omit_runtime))?;
        self.writer.flush()?;
        self.done.insert(row.scenario_id.clone());
        Ok(())
    }
}

fn existing_ids(path: &Path) -> Result<HashSet<String>> {
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Input(format!(
            "{} exists but is not a results file (unexpected header)",
            path.display()
        )));
    }
    let mut ids = HashSet::new();
    for record in reader.records() {
        let record = record?;
        ids.insert(record.get(0).unwrap_or_default().to_string());
    }
    Ok(ids)
}

/// Renders rows as a complete CSV document.
pub fn to_csv_string(rows: &[CsvRow], omit_runtime: bool) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(CSV_HEADER)?;
    for r in rows {
        writer.write_record(r.fields(omit_runtime))?;
    }
    writer.flush()?;
    let bytes = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields"))
}

/// Writes `rows` to `path`, replacing any existing file.
pub fn write_csv(path: &Path, rows: &[CsvRow], omit_runtime: bool) -> Result<()> {
    let mut f = File::create(path)?;
    f.write_all(to_csv_string(rows, omit_runtime)?.as_bytes())?;
    Ok(())
}

/// Suffix appended to a scenario id for its bound row.
pub const BOUND_SUFFIX: &str = "_bound";

/// Analytical BER upper bound of an AJ-OFDM scenario as a row with
/// `trials = 0`. The bound is averaged over the jamming placements of the
/// scenario's pattern, with the known jamming variance and unit channel power.
/// Other frameworks have no bound and yield `None`.
pub fn bound_row(scenario: &Scenario) -> Result<Option<CsvRow>> {
    scenario.validate()?;
    if scenario.framework != Framework::AjOfdm {
        return Ok(None);
    }
    let cfg = scenario.system_config()?;
    let cb = Codebook::for_order(cfg.p, cfg.n, cfg.m)?;
    let interleaver = Interleaver::for_config(&cfg)?;
    let j_tot = jammed_count(cfg.k, scenario.rho);
    let ber = expected_ber_upper(&cb, &interleaver, scenario.pattern, j_tot, cfg.sigma_w2, cfg.sigma_z2, 1.0)?;
    Ok(Some(CsvRow {
        scenario_id: format!("{}{BOUND_SUFFIX}", scenario.id),
        scenario: scenario.clone(),
        trials: 0,
        bits_sent: 0,
        bit_errors: 0,
        ber,
        runtime_ms: 0,
    }))
}

/// Bound rows for every AJ-OFDM scenario, in input order.
pub fn bound_rows(scenarios: &[Scenario]) -> Result<Vec<CsvRow>> {
    let mut out = Vec::new();
    for s in scenarios {
        if let Some(r) = bound_row(s)? {
            out.push(r);
        }
    }
    Ok(out)
}
