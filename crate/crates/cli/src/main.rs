use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use ballistic_cli::{run, Command, Overrides};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Sub {
    Transport,
    Ballistic,
    Interpolate,
    Reverse,
    Duality,
    Flowmap,
    Eulerian,
    Validate,
}

/// Ballistic transport checks on discrete measures.
#[derive(Debug, Parser)]
#[command(name = "ballistic", version)]
struct Args {
    #[arg(value_enum)]
    command: Sub,
    /// Problem file (see CONFIG.md).
    #[arg(long)]
    config: PathBuf,
    /// Directory for the report and tables.
    #[arg(long, default_value = "./out")]
    out: PathBuf,
    /// Seed for randomized probes; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Main tolerance of the command; overrides the config.
    #[arg(long)]
    tol: Option<f64>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { ballistic_cli::EXIT_INPUT as u8 } else { 0 });
        }
    };
    let cmd = match args.command {
        Sub::Transport => Command::Transport,
        Sub::Ballistic => Command::Ballistic,
        Sub::Interpolate => Command::Interpolate,
        Sub::Reverse => Command::Reverse,
        Sub::Duality => Command::Duality,
        Sub::Flowmap => Command::Flowmap,
        Sub::Eulerian => Command::Eulerian,
        Sub::Validate => Command::Validate,
    };
    if args.tol.is_some_and(|t| !(t >= 0.0) || !t.is_finite()) {
        eprintln!("input error: --tol must be a non-negative number");
        return ExitCode::from(ballistic_cli::EXIT_INPUT as u8);
    }
    let code = run(cmd, &args.config, &args.out, Overrides { seed: args.seed, tol: args.tol });
    ExitCode::from(code as u8)
}
