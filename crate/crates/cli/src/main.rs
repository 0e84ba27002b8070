use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};
use hyperinit_cli::{run, Command, RunConfig};

#[derive(Parser)]
#[command(name = "hyperinit", version, about = "Search initializing-distribution hyperparameters for quantum circuits")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a config key, e.g. `--set es.n_iters=20`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for record.json and CSV sidecars. Prints the record
    /// to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Search hyperparameters with one score function.
    Hypopt,
    /// Ground-state energy minimization from each method's initialization.
    Vqe,
    /// Classification on a CSV dataset.
    Qml,
    /// Per-layer gradient-magnitude histograms.
    GradProfile,
    /// Gradient variance against register size.
    BpScan,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let mut overrides = cli.overrides.clone();
    if let Some(s) = cli.seed {
        overrides.push(format!("seed={s}"));
    }
    if let Some(w) = cli.workers {
        overrides.push(format!("workers={w}"));
    }
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    let command = match cli.command {
        Cmd::Hypopt => Command::Hypopt,
        Cmd::Vqe => Command::Vqe,
        Cmd::Qml => Command::Qml,
        Cmd::GradProfile => Command::GradProfile,
        Cmd::BpScan => Command::BpScan,
    };
    let record = run(command, &cfg)?;
    match &cli.out {
        Some(dir) => {
            for path in record.write_to(dir)? {
                eprintln!("wrote {}", path.display());
            }
            eprintln!("content sha256 {}", record.content_sha256);
        }
        None => print!("{}", record.to_json()?),
    }
    Ok(())
}
