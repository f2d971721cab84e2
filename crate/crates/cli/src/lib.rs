//! Configuration, commands and output writers behind the `wpcn` binary.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{run, Command, Experiment, FigureId, Report};
pub use config::{Config, ModeKind};
pub use error::CliError;
pub use output::RunManifest;

#[derive(Debug, Parser)]
#[command(
    name = "wpcn",
    version,
    about = "Transmission probability, throughput and simulation for wireless powered networks"
)]
pub struct Cli {
    /// JSON configuration; the reference setting when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Overrides `simulation.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Directory for JSON and CSV results.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Overrides `battery.kind`.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeKind>,

    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Derived constants and the density regime.
    Params,
    /// Transmission probability at the configured (N, P_U).
    Rho,
    /// Optimal (N, P_U) for the battery mode.
    Optimize,
    /// Data series of one figure as CSV.
    Figure {
        #[arg(long, value_enum)]
        figure: FigureId,
    },
    /// One Monte Carlo validation experiment.
    Simulate {
        #[arg(long, value_enum)]
        experiment: Experiment,
    },
}

impl Cli {
    /// Loads the config and applies the command-line overrides.
    pub fn resolve(&self) -> Result<(Command, Config), CliError> {
        let mut cfg = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        if let Some(seed) = self.seed {
            cfg.simulation.seed = seed;
        }
        if let Some(mode) = self.mode {
            cfg.battery.kind = mode;
        }
        cfg.validate()?;
        let kind = cfg.battery.kind;
        let cmd = match &self.command {
            Sub::Params => Command::Params,
            Sub::Rho => Command::Rho(kind),
            Sub::Optimize => Command::Optimize(kind),
            Sub::Figure { figure } => Command::Figure(*figure),
            Sub::Simulate { experiment } => Command::Simulate(*experiment),
        };
        Ok((cmd, cfg))
    }
}
