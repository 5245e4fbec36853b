//! Experiment pipelines for nonuniform Dicke-like thermalization studies.
//!
//! Each subcommand of the `dicke-lab` binary maps to one function in
//! [`pipelines`]. A run reads a [`RunConfig`], writes delimited-text data
//! files into the output directory and finishes with a `manifest.toml`
//! listing the resolved configuration, stage timings and a SHA-256 digest of
//! every data file. Data files depend only on the configuration and seed.

pub mod config;
pub mod error;
pub mod manifest;
pub mod pipelines;
pub mod sim;

pub use config::RunConfig;
pub use error::{exit, CliError};
pub use manifest::{RunManifest, RunRecorder, MANIFEST_FILE};

use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Modes,
    Evolve,
    Distributions,
    Entropy,
    Engineered,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Modes => "modes",
            Command::Evolve => "evolve",
            Command::Distributions => "distributions",
            Command::Entropy => "entropy",
            Command::Engineered => "engineered",
        }
    }
}

/// Command-line overrides applied on top of the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses the default pool.
    pub threads: usize,
}

/// Loads `config_path`, applies the overrides and runs the pipeline.
pub fn run(command: Command, config_path: &Path, overrides: &Overrides) -> Result<RunManifest, CliError> {
    let mut cfg = RunConfig::load(config_path)?;
    let base = config_path.parent().map(Path::to_path_buf).unwrap_or_default();
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    match &overrides.out {
        Some(out) => cfg.output_dir = out.clone(),
        None if cfg.output_dir.is_relative() => cfg.output_dir = base.join(&cfg.output_dir),
        None => {}
    }
    run_config(command, &cfg, &base, overrides.threads)
}

/// Runs a pipeline on an already loaded configuration. Relative paths inside
/// the model section are taken from `base_dir`.
pub fn run_config(command: Command, cfg: &RunConfig, base_dir: &Path, threads: usize) -> Result<RunManifest, CliError> {
    cfg.validate()?;
    let table: toml::Table = toml::from_str(&cfg.to_toml()).map_err(|e| CliError::Config(e.to_string()))?;
    let mut rec = RunRecorder::new(&cfg.output_dir, command.name(), cfg.seed, threads, table)?;
    let result = dicke_core::par::with_threads(threads, || match command {
        Command::Modes => pipelines::modes(cfg, base_dir, &mut rec),
        Command::Evolve => pipelines::evolve(cfg, base_dir, &mut rec),
        Command::Distributions => pipelines::distributions(cfg, base_dir, &mut rec),
        Command::Entropy => pipelines::entropy(cfg, base_dir, &mut rec),
        Command::Engineered => pipelines::engineered(cfg, base_dir, &mut rec),
    });
    match result {
        Ok(()) => rec.finish(None),
        Err(e) => {
            if let Err(m) = rec.finish(Some(&e)) {
                log::error!("could not write the manifest: {m}");
            }
            Err(e)
        }
    }
}
