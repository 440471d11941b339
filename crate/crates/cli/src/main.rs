//! `qcond` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 an audit found
//! a counterexample.

mod args;
mod commands;
mod output;
mod sweep;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use args::{Cli, Command};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] qcond::Error),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) | CliError::Core(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    Counterexample,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        match s {
            Status::Success => ExitCode::SUCCESS,
            Status::Counterexample => ExitCode::from(3),
        }
    }
}

/// Caps the global rayon pool from `QCOND_THREADS`.
fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("QCOND_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Invalid(format!("QCOND_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Invalid(e.to_string()))
}

fn run(cli: &Cli) -> Result<Status, CliError> {
    configure_threads()?;
    let config = cli.run_config();
    let mut w = output::sink(config.out)?;
    let status = match &cli.command {
        Command::Analyze(a) => commands::analyze(a, &config, &mut w)?,
        Command::Audit(a) => commands::audit(a, &config, &mut w)?,
        Command::Sweep(a) => sweep::sweep(a, &config, &mut w)?,
        Command::Homodyne(a) => commands::homodyne(a, &config, &mut w)?,
        Command::Sample(a) => commands::sample(a, &config, &mut w)?,
    };
    w.flush()?;
    Ok(status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(status) => status.into(),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qcond::audit::AuditSummary;

    #[test]
    fn counterexamples_map_to_exit_three() {
        let clean = qcond::audit::audit_theorem2_grid(3);
        assert_eq!(commands::audit_status(&clean), Status::Success);
        let dirty = AuditSummary {
            counterexamples: 1,
            ..clean
        };
        assert_eq!(commands::audit_status(&dirty), Status::Counterexample);
        assert_eq!(ExitCode::from(Status::Counterexample), ExitCode::from(3));
    }

    #[test]
    fn invalid_input_maps_to_exit_two() {
        assert_eq!(CliError::Invalid("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(qcond::Error::EmptyRun).exit_code(), 2);
    }
}
