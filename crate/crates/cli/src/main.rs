use std::path::PathBuf;
use std::process::ExitCode;

use ajofdm::harness::{
    bound_row, figure_scenarios, load_scenarios, run_sweep_with, scenarios_to_toml, CsvRow, CsvSink, FIGURE_NAMES,
};
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

/// Monte Carlo BER sweeps and analytical bounds for anti-jamming spread OFDM.
#[derive(Parser)]
#[command(name = "ajofdm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate every scenario of a file and append one CSV row per scenario.
    ///
    /// Scenarios whose id is already in the output file are skipped, so an
    /// interrupted run resumes where it stopped.
    Run {
        scenario_file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; defaults to the available cores.
        #[arg(long)]
        parallel: Option<usize>,
        /// Replaces the seed of every scenario.
        #[arg(long)]
        seed: Option<u64>,
        /// Write 0 in the runtime_ms column so reruns are byte-identical.
        #[arg(long)]
        omit_runtime: bool,
    },
    /// Append the analytical BER bound of every AJ-OFDM scenario (trials = 0).
    Bound {
        scenario_file: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a prepackaged figure scenario file.
    Figures {
        /// One of fig3, fig4a, fig4b, fig5a, fig5b, fig6, fig7.
        name: String,
        /// Write to this path instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            scenario_file,
            out,
            parallel,
            seed,
            omit_runtime,
        } => {
            let mut scenarios =
                load_scenarios(&scenario_file).with_context(|| format!("reading {}", scenario_file.display()))?;
            if let Some(seed) = seed {
                for s in &mut scenarios {
                    s.seed = seed;
                }
            }
            let workers = match parallel {
                Some(0) => bail!("--parallel must be at least 1"),
                Some(n) => n,
                None => std::thread::available_parallelism().map_or(1, |n| n.get()),
            };
            let mut sink = CsvSink::open(&out, omit_runtime).with_context(|| format!("opening {}", out.display()))?;
            let pending: Vec<_> = scenarios.into_iter().filter(|s| !sink.contains(&s.id)).collect();
            let total = pending.len();
            let mut done = 0;
            run_sweep_with(&pending, workers, |point| {
                done += 1;
                eprintln!(
                    "[{done}/{total}] {}: {} errors / {} bits over {} trials, BER {:.3e}",
                    point.scenario.id, point.bit_errors, point.bits_sent, point.trials, point.ber
                );
                sink.write(&CsvRow::from(&point))
            })?;
        }
        Command::Bound { scenario_file, out } => {
            let scenarios =
                load_scenarios(&scenario_file).with_context(|| format!("reading {}", scenario_file.display()))?;
            let mut sink = CsvSink::open(&out, false).with_context(|| format!("opening {}", out.display()))?;
            for s in &scenarios {
                if let Some(row) = bound_row(s)? {
                    if !sink.contains(&row.scenario_id) {
                        sink.write(&row)?;
                    }
                }
            }
        }
        Command::Figures { name, out } => {
            if !FIGURE_NAMES.contains(&name.as_str()) {
                bail!("unknown figure '{name}'; expected one of {}", FIGURE_NAMES.join(", "));
            }
            let text = scenarios_to_toml(&figure_scenarios(&name)?)?;
            match out {
                Some(path) => std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
