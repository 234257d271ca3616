//! `rescat` command line: presets and flat config files in, CSV/JSON tables out.

use std::fmt::Display;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub mod commands;
pub mod params;
pub mod table;

pub use params::Params;
pub use table::{Cell, Table};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad, missing or unknown parameters; exit code 2.
    #[error("configuration error: {0}")]
    Config(String),
    /// The requested design cannot be realized; exit code 3.
    #[error("infeasible design: {0}")]
    Infeasible(String),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn missing(key: &str) -> Self {
        CliError::Config(format!("missing required parameter `{key}`"))
    }

    pub fn output(e: impl Display) -> Self {
        CliError::Output(e.to_string())
    }

    pub fn config(e: impl Display) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Output(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// |r| and phase of the empty and coupled cavity against detuning.
    ReflectivitySweep,
    /// Resonant contrast, fidelity and efficiency against κ/κ_s at fixed κ_T.
    LossSweep,
    /// Run a heralding protocol on the state-vector simulator.
    Protocol,
    /// Resonance-scattering cavity design for a preset or explicit emitter.
    Design,
    /// Monte Carlo heralding times for pairs and linear clusters.
    Herald,
    /// List the built-in presets.
    Presets,
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "rescat",
    version,
    about = "Resonance-scattering spin-photon entanglement calculator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Flat `key = value` parameter file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Parameter override, applied after the config file; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Write to PATH instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Output format; `design` defaults to json, everything else to csv.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// RNG seed for `herald`; overrides a `seed` parameter.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

/// Runs `cli` and returns the rendered output.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let mut params = match &cli.config {
        Some(path) => Params::from_config_file(path)?,
        None => Params::default(),
    };
    for assignment in &cli.set {
        params.set(assignment)?;
    }
    let default_format = if cli.command == Command::Design {
        Format::Json
    } else {
        Format::Csv
    };
    let format = cli.format.unwrap_or(default_format);
    let out = match cli.command {
        Command::ReflectivitySweep => commands::reflectivity_sweep(&mut params)?.into(),
        Command::LossSweep => commands::loss_sweep(&mut params)?.into(),
        Command::Protocol => commands::protocol(&mut params)?.into(),
        Command::Design => commands::design(&mut params)?,
        Command::Herald => commands::herald(&mut params, cli.seed)?.into(),
        Command::Presets => commands::presets()?.into(),
    };
    params.finish()?;
    out.render(format)
}

/// What a command produced, before formatting.
#[derive(Debug, Clone)]
pub enum Output {
    Table(Table),
    /// A single record whose JSON form is an object rather than a table.
    Record {
        table: Table,
        json: serde_json::Value,
    },
}

impl From<Table> for Output {
    fn from(t: Table) -> Self {
        Output::Table(t)
    }
}

impl Output {
    pub fn table(&self) -> &Table {
        match self {
            Output::Table(t) | Output::Record { table: t, .. } => t,
        }
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match (self, format) {
            (_, Format::Csv) => self.table().to_csv(),
            (Output::Table(t), Format::Json) => pretty(&t.to_json_value()),
            (Output::Record { json, .. }, Format::Json) => pretty(json),
        }
    }
}

fn pretty(v: &serde_json::Value) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(CliError::output)?;
    s.push('\n');
    Ok(s)
}
