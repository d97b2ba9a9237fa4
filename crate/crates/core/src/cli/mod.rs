//! `licsq` command line: one subcommand per model, driven by a config file.
//!
//! Each run prints a human-readable report to stdout and writes
//! `<out>/<command>.json` (a single record with `schema_version`, the seed and
//! the fully resolved configuration) plus any CSV plot data. Exit status is 0
//! on success, 2 for configuration or input errors and 3 for I/O failures.

mod commands;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};

/// Version of the JSON record layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "licsq", version, about = "Li–Cs messenger-atom quantum register models")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Directory for the JSON record and CSV files.
    #[arg(long, global = true, value_name = "DIR", default_value = "licsq-out")]
    pub out: PathBuf,
    /// Random seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for grid scans and Monte-Carlo (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Scan lattice intensities for the feasible operating region.
    Feasibility,
    /// Messenger–qubit gate budget: Franck–Condon factor, Rabi rate, errors.
    Gate,
    /// Transport error, velocity bound and entanglement timing.
    Transport,
    /// Create → transport → swap simulation with fidelity report.
    Protocol,
    /// Beam geometry, intensity pattern and phase-shift translations.
    Geometry,
    /// Position-stability RMS and spectra from recorded CSV traces.
    Stability {
        /// Position CSV; repeatable. Overrides `[stability] inputs`.
        #[arg(long, value_name = "PATH")]
        input: Vec<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Feasibility => "feasibility",
            Command::Gate => "gate",
            Command::Transport => "transport",
            Command::Protocol => "protocol",
            Command::Geometry => "geometry",
            Command::Stability { .. } => "stability",
        }
    }
}

/// Self-describing output record.
#[derive(Debug, Serialize)]
struct Record<'a, C: Serialize, R: Serialize> {
    schema_version: u32,
    command: &'a str,
    seed: u64,
    species: &'a toml::Table,
    config: C,
    results: R,
}

/// Per-run context shared by the subcommands.
pub(crate) struct Session<'a> {
    pub config: &'a RunConfig,
    pub seed: u64,
    pub out: &'a Path,
    command: &'static str,
    species: toml::Table,
}

impl Session<'_> {
    fn io_error(path: &Path, e: std::io::Error) -> Error {
        Error::Io(format!("{}: {e}", path.display()))
    }

    pub fn write_json<C: Serialize, R: Serialize>(&self, config: C, results: R) -> Result<PathBuf> {
        let record = Record {
            schema_version: SCHEMA_VERSION,
            command: self.command,
            seed: self.seed,
            species: &self.species,
            config,
            results,
        };
        let mut text = serde_json::to_string_pretty(&record).map_err(|e| Error::Numerical(e.to_string()))?;
        text.push('\n');
        let path = self.out.join(format!("{}.json", self.command));
        fs::write(&path, text).map_err(|e| Self::io_error(&path, e))?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    /// Creates `<out>/<name>` and hands a buffered writer to `fill`. Returns
    /// `name`, the path relative to the output directory.
    pub fn write_csv(
        &self,
        name: &str,
        fill: impl FnOnce(&mut dyn std::io::Write) -> std::io::Result<()>,
    ) -> Result<PathBuf> {
        let path = self.out.join(name);
        let file = fs::File::create(&path).map_err(|e| Self::io_error(&path, e))?;
        let mut w = std::io::BufWriter::new(file);
        fill(&mut w).and_then(|_| std::io::Write::flush(&mut w)).map_err(|e| Self::io_error(&path, e))?;
        log::info!("wrote {}", path.display());
        Ok(PathBuf::from(name))
    }
}

pub fn exit_code(error: &Error) -> u8 {
    match error {
        Error::Io(_) => 3,
        _ => 2,
    }
}

/// Runs one parsed invocation, returning the text report.
pub fn execute(cli: &Cli) -> Result<String> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let species = config.species_overrides()?.table().clone();
    fs::create_dir_all(&cli.out).map_err(|e| Session::io_error(&cli.out, e))?;
    let session = Session {
        config: &config,
        seed: cli.seed.or(config.seed).unwrap_or(0),
        out: &cli.out,
        command: cli.command.name(),
        species,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Io(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Feasibility => commands::feasibility(&session),
        Command::Gate => commands::gate(&session),
        Command::Transport => commands::transport(&session),
        Command::Protocol => commands::protocol(&session),
        Command::Geometry => commands::geometry(&session),
        Command::Stability { input } => commands::stability(&session, input),
    })
}

/// Parses `args` (including the program name) and runs; never panics on bad
/// input.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    match execute(&cli) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
