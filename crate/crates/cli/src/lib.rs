//! Batch front end: reads a problem file, runs one operation and writes a
//! report with certificate blocks and companion tables.

pub mod commands;
pub mod config;
pub mod measure_file;
pub mod problem;
pub mod report;

use std::path::Path;

use ballistic_core::Error;

/// Process exit codes.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_CERTIFICATE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CliError {
    Input(String),
    Numerical(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Numerical(m) => m,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidGrid(_)
            | Error::SizeMismatch(_)
            | Error::DimensionUnsupported(_)
            | Error::InvalidMeasure(_)
            | Error::NonConvexInput(_)
            | Error::VariantUnsupported(_)
            | Error::GridMismatch(_)
            | Error::OutOfDomain(_) => CliError::Input(e.to_string()),
            Error::EmptyDomain
            | Error::NoConvergence { .. }
            | Error::Infeasible
            | Error::MapUnavailable(_)
            | Error::StepUnderflow(_)
            | Error::InfeasiblePath(_) => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Transport,
    Ballistic,
    Interpolate,
    Reverse,
    Duality,
    Flowmap,
    Eulerian,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Transport => "transport",
            Command::Ballistic => "ballistic",
            Command::Interpolate => "interpolate",
            Command::Reverse => "reverse",
            Command::Duality => "duality",
            Command::Flowmap => "flowmap",
            Command::Eulerian => "eulerian",
            Command::Validate => "validate",
        }
    }
}

/// Values given on the command line that take precedence over the file.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

/// Runs one command and returns the process exit code. Diagnostics go to
/// stderr.
pub fn run(cmd: Command, config: &Path, out: &Path, overrides: Overrides) -> i32 {
    let result = config::Config::load(config).and_then(|c| commands::execute(cmd, &c, overrides));
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    match report.write(out) {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    }
    if report.failures() == 0 {
        EXIT_PASS
    } else {
        eprintln!("{} certificate(s) failed", report.failures());
        EXIT_CERTIFICATE
    }
}
