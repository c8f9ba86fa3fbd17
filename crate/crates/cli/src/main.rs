//! `qudit`: command-line recipes for pulse design, readout emulation and
//! AWG waveform export.

mod commands;
mod config;
mod error;
mod help;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use commands::{Outputs, Report, TableFormat};
use error::{CliError, Result};
use manifest::RunManifest;

#[derive(Parser)]
#[command(
    name = "qudit",
    version,
    about = "Pulse design and readout emulation for spin qudits"
)]
#[command(after_long_help = help::COMMON)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-tone Rabi traces, detuning and power sweeps.
    #[command(after_long_help = help::RABI)]
    Rabi(RunArgs),
    /// Search a multichromatic Hadamard pulse.
    #[command(after_long_help = help::HADAMARD)]
    Hadamard(RunArgs),
    /// Plan a resonant Grover selection pulse, optionally with a detuning map.
    #[command(after_long_help = help::GROVER)]
    Grover(RunArgs),
    /// Emulate repeated initialise/drive/read-out cycles.
    #[command(after_long_help = help::SAMPLE)]
    Sample(RunArgs),
    /// Render the AWG sample stream of a pulse sequence.
    #[command(after_long_help = help::WAVEFORM)]
    Waveform(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file (keys listed below).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the command's seed keys.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Format of tabular outputs.
    #[arg(long, value_enum, default_value = "csv")]
    format: TableFormat,
    /// Override a config value: key.path=value. Repeatable.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    sets: Vec<String>,
}

fn execute<C, F>(name: &str, args: &RunArgs, seed_paths: &[&str], run: F) -> Result<Option<String>>
where
    C: DeserializeOwned + Serialize,
    F: FnOnce(&C, &mut Outputs) -> Result<Report>,
{
    let start = Instant::now();
    let value = config::load_value(args.config.as_deref(), &args.sets, args.seed, seed_paths)?;
    let cfg: C = config::parse(value)?;
    let mut out = Outputs::new(&args.out, args.format)?;
    let report = run(&cfg, &mut out)?;
    let snapshot = serde_json::to_value(&cfg).expect("config serialises");
    let seed = seed_paths.iter().find_map(|p| lookup(&snapshot, p)).or(args.seed);
    RunManifest {
        command: name.to_string(),
        config: snapshot,
        seed,
        artifact: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        outputs: out.written().to_vec(),
        wall_clock_s: start.elapsed().as_secs_f64(),
        summary: report.summary,
    }
    .write(out.dir())?;
    Ok(report.not_converged)
}

fn lookup(v: &serde_json::Value, path: &str) -> Option<u64> {
    path.split('.').try_fold(v, |node, key| node.get(key))?.as_u64()
}

fn dispatch(cli: Cli) -> Result<Option<String>> {
    let (Command::Rabi(args)
    | Command::Hadamard(args)
    | Command::Grover(args)
    | Command::Sample(args)
    | Command::Waveform(args)) = &cli.command;
    if let Some(n) = args.workers {
        if n == 0 {
            return Err(CliError::config("--workers must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("--workers: {e}")))?;
    }
    match &cli.command {
        Command::Rabi(a) => execute("rabi", a, &[], commands::rabi::run),
        Command::Hadamard(a) => execute("hadamard", a, &["search.seed"], commands::hadamard::run),
        Command::Grover(a) => {
            // The map's sampling seed is only touched when sampling is configured.
            let value = config::load_value(a.config.as_deref(), &a.sets, None, &[])?;
            let paths: &[&str] = if value.pointer("/map/sampling").is_some_and(|s| !s.is_null()) {
                &["hadamard.search.seed", "map.sampling.seed"]
            } else {
                &["hadamard.search.seed"]
            };
            execute("grover", a, paths, commands::grover::run)
        }
        Command::Sample(a) => execute("sample", a, &["cycles.seed"], commands::sample::run),
        Command::Waveform(a) => execute("waveform", a, &[], commands::waveform::run),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(msg)) => {
            eprintln!("qudit: {msg}");
            ExitCode::from(error::EXIT_NOT_CONVERGED)
        }
        Err(e) => {
            eprintln!("qudit: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
