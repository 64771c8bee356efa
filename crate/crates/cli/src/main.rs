// Copyright 2026 The spinchain-control Authors
// SPDX-License-Identifier: Apache-2.0

//! `spinchain`: config-driven gate synthesis, robustness and filtering runs.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::OutputDir;

#[derive(Parser, Debug)]
#[command(name = "spinchain", version, about = "Local control of Heisenberg spin chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML, or a JSON report's embedded config).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides every seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Multistart BFGS optimization of a pulse sequence.
    Optimize,
    /// Best fidelity over a grid of total times.
    MinTime,
    /// Average fidelity under static amplitude noise.
    Sensitivity,
    /// Power spectra of the x and y fields.
    Spectrum,
    /// Fidelity of low-pass or Gaussian filtered fields.
    Filter,
    /// Filter, re-optimize and filter again.
    IterateFilter,
    /// Dimension of the dynamical Lie algebra.
    LieDim,
}

fn run(cli: &Cli) -> Result<(String, Vec<PathBuf>), CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let cfg = RunConfig::load(path)?.resolve(cli.seed)?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let mut out = OutputDir::create(&cli.out)?;
    let summary = match cli.command {
        Command::Optimize => commands::optimize(&cfg, &mut out)?,
        Command::MinTime => commands::min_time(&cfg, &mut out)?,
        Command::Sensitivity => commands::sensitivity(&cfg, &mut out)?,
        Command::Spectrum => commands::spectrum(&cfg, &mut out)?,
        Command::Filter => commands::filter(&cfg, &mut out)?,
        Command::IterateFilter => commands::iterate_filter(&cfg, &mut out)?,
        Command::LieDim => commands::lie_dim(&cfg, &mut out)?,
    };
    Ok((summary, out.written().to_vec()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((summary, files)) => {
            println!("{summary}");
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("spinchain: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
