//! Command-line front end: exact evaluation, asymptotic comparison, Monte
//! Carlo and the `C_n` table, written as CSV or JSON.

mod commands;
mod config;
mod table;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Settings;

#[derive(Debug, Parser)]
#[command(name = "qtazrp", version, about = "Two-point correlations of the two-species q-TAZRP")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Six-term formula with all intermediates for one lattice instance.
    Exact(Settings),
    /// Exact against asymptotic q-terms over a list of L, with fitted slopes.
    Compare(Settings),
    /// Monte Carlo estimate of the observable against the exact value.
    Simulate(Settings),
    /// Exact rational coefficients of C_0 .. C_order.
    Cn(Settings),
    /// Geometry and winding numbers of the contour families.
    ContoursCheck(Settings),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(qtazrp::Error),
    Io(std::io::Error),
}

impl From<qtazrp::Error> for CliError {
    fn from(e: qtazrp::Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use qtazrp::Error::*;
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(Domain(_) | Precondition(_) | InvalidContour(_)) => 2,
            CliError::Lib(NonConvergence(_) | PoleProximity(_) | DegenerateFit(_)) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

type Handler = fn(&Settings) -> Result<table::Table, CliError>;

fn run(command: Command) -> Result<(), CliError> {
    let (settings, f): (Settings, Handler) = match command {
        Command::Exact(s) => (s, commands::exact),
        Command::Compare(s) => (s, commands::compare),
        Command::Simulate(s) => (s, commands::simulate),
        Command::Cn(s) => (s, commands::cn),
        Command::ContoursCheck(s) => (s, commands::contours_check),
    };
    let settings = settings.resolve()?;
    let table = f(&settings)?;
    table.emit(settings.format(), settings.out.as_deref()).map_err(CliError::Io)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qtazrp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
