//! Scenario files, seeded Monte Carlo sweeps and CSV results.

pub mod figures;
pub mod output;
pub mod scenario;
pub mod sweep;

pub use figures::{figure_scenarios, FIGURE_NAMES};
pub use output::{bound_row, bound_rows, fmt_g9, to_csv_string, write_csv, CsvRow, CsvSink, CSV_HEADER};
pub use scenario::{load_scenarios, parse_scenarios, scenarios_to_toml, Detector, Framework, Order, Scenario};
pub use sweep::{run_scenario, run_sweep, run_sweep_with, run_trial, BerCurvePoint, TrialResult, TrialRunner};
