//! `fgig`: batch front end writing JSON reports and CSV plot data.
//!
//! Exit status: 0 on success, 2 for invalid requests, 3 for numerical
//! failure, 1 when the output cannot be written.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod error;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use log::LevelFilter;

use args::{Cli, Command, Format};
use error::{CliError, CliResult};
use output::Report;

/// `FGIG_LOG` ∈ {quiet, info, debug}; anything else keeps warnings only.
fn init_logging() {
    let level = match std::env::var("FGIG_LOG").as_deref() {
        Ok("quiet") => LevelFilter::Off,
        Ok("info") => LevelFilter::Info,
        Ok("debug") => LevelFilter::Debug,
        _ => LevelFilter::Warn,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .init();
}

fn dispatch(command: &Command) -> CliResult<Report> {
    match command {
        Command::Params(p) => commands::params(p),
        Command::Density { params, grid, nodes } => commands::density(params, *grid, *nodes),
        Command::Transform { params, grid, imag, order } => commands::transform(params, *grid, *imag, *order),
        Command::Levy { params, grid } => commands::levy(params, *grid),
        Command::Fsd { params, grid } => commands::fsd(params, *grid),
        Command::Convolve { params, points } => commands::convolve(params, *points),
        Command::Fixpoint(shape) => commands::fixpoint(shape),
        Command::Limits { shape, betas } => commands::limits(shape, betas),
        Command::Entropy(p) => commands::entropy(p),
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Validation("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    }
    let report = dispatch(&cli.command)?;
    log::info!("{}: passed = {}", report.command, report.passed());
    let text = match cli.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    match &cli.output {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fgig: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
