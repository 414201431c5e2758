//! `torusct`: phantoms, forward data, reconstructions and error reports for
//! X-ray tomography on the flat torus.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use torusct::TorusError;

use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "torusct", version, about)]
struct Cli {
    /// JSON experiment config; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rasterize a phantom to a PGM (with sidecar) or CSV grid.
    Phantom(ExperimentConfig),
    /// Simulate geodesic data (A1, A2, AT2) or a parallel-beam sinogram (radon).
    Forward(ExperimentConfig),
    /// Reconstruct and optionally filter a coefficient table from geodesic data.
    Reconstruct(ExperimentConfig),
    /// Relative reconstruction error or Fourier cutoff error as JSON.
    Metrics(ExperimentConfig),
    /// Evaluate the regularization-strategy bound, or check it on random trials.
    Bound(ExperimentConfig),
    /// List, count or describe the direction set of a radius.
    Directions(ExperimentConfig),
    /// Average reconstructions of rotated phantoms in the original orientation.
    RotateAverage(ExperimentConfig),
}

/// Exit status 2 for file-system failures, 1 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    let io = err.chain().any(|cause| {
        cause.downcast_ref::<TorusError>().is_some_and(TorusError::is_io) || cause.is::<std::io::Error>()
    });
    if io {
        2
    } else {
        1
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let (flags, run): (ExperimentConfig, fn(&ExperimentConfig) -> anyhow::Result<()>) = match cli.command {
        Command::Phantom(c) => (c, commands::phantom),
        Command::Forward(c) => (c, commands::forward),
        Command::Reconstruct(c) => (c, commands::reconstruct),
        Command::Metrics(c) => (c, commands::metrics),
        Command::Bound(c) => (c, commands::bound),
        Command::Directions(c) => (c, commands::directions),
        Command::RotateAverage(c) => (c, commands::rotate_average),
    };
    let cfg = ExperimentConfig::resolve(flags, cli.config.as_deref())?;
    run(&cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
