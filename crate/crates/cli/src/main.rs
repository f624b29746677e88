//! `qgauge`: run, scan and check the stream–collide lattice from a flat config.
//!
//! Exit status: 0 success, 1 validation error, 2 runtime error, 3 a check failed.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CliError, Outcome};

#[derive(Parser, Debug)]
#[command(
    name = "qgauge",
    version,
    about = "Stream-collide lattice simulator for a fermion coupled to a massive gauge field"
)]
#[command(after_help = "Any config key can be overridden with --key=value after the subcommand.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the fixed matrix representations (Clifford relations, spin algebra, T).
    VerifyAlgebra,
    /// Eigenphase dispersion of the one-step operator; writes dispersion.csv.
    Dispersion {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evolve the initial state; writes diag.csv and snap_<step>.bin.
    Evolve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Convergence study against the continuum oracle; writes converge.csv.
    Converge {
        #[arg(long)]
        config: PathBuf,
    },
    /// Local-equilibrium checks on London initial data.
    Equilibrium {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Split `--key=value` overrides from the arguments clap should see.
fn split_overrides(args: Vec<String>) -> (Vec<String>, Vec<(String, String)>) {
    let mut rest = vec![];
    let mut overrides = vec![];
    for a in args {
        match a.strip_prefix("--").and_then(|s| s.split_once('=')) {
            Some((k, v)) if k != "config" => overrides.push((k.to_string(), v.to_string())),
            _ => rest.push(a),
        }
    }
    (rest, overrides)
}

fn main() -> ExitCode {
    let (args, overrides) = split_overrides(std::env::args().collect());
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::VerifyAlgebra => commands::verify_algebra(),
        Command::Dispersion { config } => commands::dispersion(&config, &overrides),
        Command::Evolve { config } => commands::evolve(&config, &overrides),
        Command::Converge { config } => commands::converge(&config, &overrides),
        Command::Equilibrium { config } => commands::equilibrium(&config, &overrides),
    };
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(3),
        Err(CliError::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
