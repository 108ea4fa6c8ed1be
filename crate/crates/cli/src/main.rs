//! `btclass`: tables, training, prediction, cross-validation and
//! benchmarks for Bregman-Tweedie linear classifiers.

mod args;
mod learn;
mod tables;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Error carrying the process exit status.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or flag combinations (exit 2).
    Usage(anyhow::Error),
    /// Anything that went wrong while running (exit 1).
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn usage(msg: impl std::fmt::Display) -> Self {
        Failure::Usage(anyhow::anyhow!("{msg}"))
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Runtime(e.into())
    }
}

pub type CmdResult = Result<(), Failure>;

/// Writes command output to `out`, or to stdout when absent.
pub fn emit(out: Option<&Path>, text: &str) -> CmdResult {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| anyhow::anyhow!("writing {}: {e}", p.display()))?,
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
            so.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let res = match cli.command {
        Command::LossTable(a) => tables::loss_table(&a),
        Command::DivergenceTable(a) => tables::divergence_table(&a),
        Command::DomainInfo(a) => tables::domain_info(&a),
        Command::Train(a) => learn::train(&a),
        Command::Predict(a) => learn::predict(&a),
        Command::Cv(a) => learn::cv(&a),
        Command::Bench(a) => learn::bench(&a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
