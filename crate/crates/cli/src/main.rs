use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qsdci_core::scenario::{emit_csv, load_scenario, run_dsp_with_constellation, run_scenario, Command, ResultTable};

/// Runs link, key-rate, allocation, DSP and energy scenarios and writes CSV tables.
#[derive(Parser)]
#[command(name = "qsdci", version)]
struct Cli {
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Args)]
struct ScenarioArg {
    /// Scenario file (TOML).
    scenario: PathBuf,
}

#[derive(Subcommand)]
enum Sub {
    /// Noise budget on the quantum core, one row per launch power.
    Noise(ScenarioArg),
    /// Finite-key secret key rate at each configured distance.
    Skr(ScenarioArg),
    /// Best placement of the quantum and classical channels.
    Plan(ScenarioArg),
    /// Multicore versus single-core wavelength multiplexing key-rate curves.
    Curves(ScenarioArg),
    /// Coherent receiver chain over a simulated dual-polarization frame.
    Dsp {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Also write equalizer and phase-recovery constellation points here.
        #[arg(long)]
        constellation: Option<PathBuf>,
    },
    /// Energy per bit and module power of the transceiver presets.
    Energy(ScenarioArg),
    /// Runs the scenario's sweep section, one block of rows per value.
    Sweep(ScenarioArg),
}

fn write(table: &ResultTable, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => emit_csv(table, path).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            table.write_csv(&mut stdout)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let Format::Csv = cli.format;
    let (command, arg, constellation) = match cli.command {
        Sub::Noise(a) => (Command::Noise, a, None),
        Sub::Skr(a) => (Command::Skr, a, None),
        Sub::Plan(a) => (Command::Plan, a, None),
        Sub::Curves(a) => (Command::Curves, a, None),
        Sub::Dsp {
            scenario,
            constellation,
        } => (Command::Dsp, scenario, constellation),
        Sub::Energy(a) => (Command::Energy, a, None),
        Sub::Sweep(a) => (Command::Sweep, a, None),
    };
    let mut scenario = load_scenario(&arg.scenario)?;
    if cli.seed.is_some() {
        scenario.seed = cli.seed;
    }
    match constellation {
        Some(path) => {
            let (summary, points) = run_dsp_with_constellation(&scenario)?;
            emit_csv(&points, &path).with_context(|| format!("writing {}", path.display()))?;
            write(&summary, cli.out.as_ref())
        }
        None => write(&run_scenario(&scenario, command)?, cli.out.as_ref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // Core errors already print their stage chain; stop there.
            let mut parts = Vec::new();
            for cause in e.chain() {
                parts.push(cause.to_string());
                if cause.is::<qsdci_core::Error>() {
                    break;
                }
            }
            eprintln!("error: {}", parts.join(": "));
            ExitCode::FAILURE
        }
    }
}
