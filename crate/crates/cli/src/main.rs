use clap::Parser;
use dicke_lab::{exit, run, Command, Overrides};
use std::path::PathBuf;

/// Simulate thermalization in nonuniform Dicke-like spin-boson models.
#[derive(Debug, Parser)]
#[command(name = "dicke-lab", version)]
struct Cli {
    /// Pipeline to run.
    #[arg(value_enum)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let overrides = Overrides { seed: cli.seed, out: cli.out, threads: cli.threads };
    let code = match run(cli.command, &cli.config, &overrides) {
        Ok(manifest) => {
            println!("{} complete: {} files", manifest.command, manifest.files.len());
            exit::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
