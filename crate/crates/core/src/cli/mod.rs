//! Command-line front end.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Result;
use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "turbsynth", version, about = "Gaussian-mixture turbulence spectra and field synthesis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tables of E(k), e(k) and f(l) for the configured family.
    Spectra(CommonArgs),
    /// Mixture table, reconstruction and its error report.
    Mixture(CommonArgs),
    /// Velocity snapshots and a manifest.
    Synthesize(CommonArgs),
    /// One-dimensional spectra estimated from snapshots.
    Estimate(EstimateArgs),
    /// Full chain with pass/fail checks.
    Validate(CommonArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// TOML configuration file; missing keys take the defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of realizations.
    #[arg(long)]
    pub ensemble: Option<usize>,
    /// Worker threads; 0 uses one per CPU.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Rescale mixture weights to sum to one.
    #[arg(long)]
    pub renormalize: bool,
    /// Multiplies every source amplitude (fault injection).
    #[arg(long, hide = true, default_value_t = 1.0)]
    pub amplitude_scale: f64,
}

#[derive(Debug, Args, Clone)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Directory holding the field snapshots (default: the output directory).
    #[arg(long)]
    pub input: Option<PathBuf>,
}

impl CommonArgs {
    /// The file configuration with the command-line overrides applied.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.synthesis.seed = seed;
        }
        if let Some(n) = self.ensemble {
            cfg.synthesis.ensemble = n;
        }
        if let Some(w) = self.workers {
            cfg.synthesis.workers = w;
        }
        if self.renormalize {
            cfg.mixture.renormalize = true;
        }
        cfg.manifest = None;
        cfg.validate()?;
        Ok(cfg)
    }
}
