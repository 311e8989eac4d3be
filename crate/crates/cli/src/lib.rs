//! Command-line front end: configuration, subcommands and artifact output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod quantity;
pub mod record;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use config::Config;
pub use error::CliError;
pub use record::RunRecord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Pgm,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn pgm(self) -> bool {
        matches!(self, Format::Pgm | Format::Both)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ramsey-wigner",
    version,
    about = "Ramsey-interferometric Wigner function simulation"
)]
pub struct Cli {
    /// TOML configuration file; defaults are used when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads (default: all available).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Format of phase-space grids.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Exact and perturbative trap spectra and the differential shift.
    Spectrum,
    /// Fock states of the trap and their parity.
    Fock,
    /// Contrast collapse scan and hold-time calibration.
    Calibrate,
    /// Ramsey signal at the origin for Fock states 0..=scan.n_max.
    ParityScan,
    /// Ramsey scan of the phase-space window for Fock state scan.state.
    WignerScan,
    /// Reference Wigner function of the same state and window.
    Oracle,
    /// Difference metrics of two scan CSV files.
    Compare { a: PathBuf, b: PathBuf },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Fock => "fock",
            Command::Calibrate => "calibrate",
            Command::ParityScan => "parity-scan",
            Command::WignerScan => "wigner-scan",
            Command::Oracle => "oracle",
            Command::Compare { .. } => "compare",
        }
    }
}

/// Parses arguments, loads the configuration with overrides from `env` and
/// runs the command.
pub fn run(
    cli: Cli,
    env: impl IntoIterator<Item = (String, String)>,
) -> Result<RunRecord, CliError> {
    let text = match &cli.config {
        Some(path) => output::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config: {e}")))?,
        None => String::new(),
    };
    let config = Config::from_toml(&text, env)?;
    let jobs = cli
        .jobs
        .unwrap_or_else(ramsey_wigner::parallel::available_jobs);
    if jobs == 0 {
        return Err(CliError::Config("--jobs must be positive".into()));
    }
    commands::execute(&cli.command, config, &cli.out, jobs, cli.format)
}

/// Full entry point returning the process exit code.
pub fn main_with<I, T>(args: I, env: impl IntoIterator<Item = (String, String)>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let out = cli.out.clone();
    match run(cli, env) {
        Ok(record) => {
            for (key, value) in &record.diagnostics.values {
                println!("{key} = {value}");
            }
            println!(
                "{}: {} artifacts in {}",
                record.command,
                record.artifacts.len(),
                out.display()
            );
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
