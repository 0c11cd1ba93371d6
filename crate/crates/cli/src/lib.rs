//! `ces`: spectra, eigenfunctions, coherent states, densities and
//! verification reports for the CES partners of the radial oscillator.

pub mod commands;
pub mod output;
pub mod verify;

use std::path::PathBuf;

use ces_core::model::{ModelParams, Phase};
use ces_core::CesError;
use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use commands::run;

#[derive(Debug, Parser)]
#[command(name = "ces", version, about = "CES radial-oscillator partners and their non-linear coherent states")]
pub struct Cli {
    #[arg(long, global = true, default_value_t = 1.0, allow_negative_numbers = true)]
    pub gamma: f64,
    #[arg(long, global = true, default_value_t = 1.0, allow_negative_numbers = true)]
    pub epsilon: f64,
    #[arg(long, global = true, value_enum, default_value_t = PhaseArg::Broken)]
    pub phase: PhaseArg,
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PhaseArg {
    Broken,
    Unbroken,
}

impl From<PhaseArg> for Phase {
    fn from(p: PhaseArg) -> Self {
        match p {
            PhaseArg::Broken => Phase::Broken,
            PhaseArg::Unbroken => Phase::Unbroken,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SectorArg {
    #[value(name = "plus", alias = "+")]
    Plus,
    #[value(name = "minus", alias = "-")]
    Minus,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energies of H-.
    Spectrum {
        #[arg(long, default_value_t = 10)]
        levels: usize,
    },
    /// Eigenfunction of H+ or H- sampled on a grid.
    Wavefunction {
        #[arg(long, value_enum, default_value_t = SectorArg::Minus)]
        sector: SectorArg,
        #[arg(long, default_value_t = 0)]
        n: usize,
        /// Grid points (default sized to the level).
        #[arg(long)]
        points: Option<usize>,
    },
    /// Coherent state D|mu> = mu|mu> with its diagnostics.
    Coherent {
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        mu_re: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        mu_im: f64,
        #[arg(long, default_value_t = 1e-14)]
        rel_tail: f64,
    },
    /// Measure density sigma(x) and radial density f(x).
    Density {
        #[arg(long, default_value_t = 40.0)]
        x_max: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// `epsilon=a,b,c` or `gamma=a,b,c`.
        #[arg(long, allow_hyphen_values = true)]
        sweep: Option<String>,
    },
    /// Run invariant checks; exit status 1 on any failure.
    Verify {
        #[arg(long, value_enum, default_value_t = verify::Suite::All)]
        suite: verify::Suite,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parameter(String),
    #[error(transparent)]
    Numeric(CesError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl From<CesError> for CliError {
    fn from(e: CesError) -> Self {
        match e {
            CesError::InvalidParameter(_) | CesError::NodeOfU { .. } | CesError::WrongPhase { .. } => {
                CliError::Parameter(e.to_string())
            }
            other => CliError::Numeric(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parameter(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 1,
        }
    }
}

/// Validated model parameters and output settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ModelParams,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let params = ModelParams::new(cli.gamma, cli.epsilon, cli.phase.into())?;
        Ok(Self { params, format: cli.format, out: cli.out.clone() })
    }
}
