//! Experiment runner: configuration, command dispatch and run records.

pub mod commands;
pub mod config;
pub mod record;

use std::fmt;
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};

pub use config::RunConfig;
pub use record::{Content, Meta, RunRecord, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Hypopt,
    Vqe,
    Qml,
    GradProfile,
    BpScan,
}

impl Command {
    pub const ALL: [Command; 5] = [Command::Hypopt, Command::Vqe, Command::Qml, Command::GradProfile, Command::BpScan];

    pub fn name(self) -> &'static str {
        match self {
            Command::Hypopt => "hypopt",
            Command::Vqe => "vqe",
            Command::Qml => "qml",
            Command::GradProfile => "grad-profile",
            Command::BpScan => "bp-scan",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match Command::ALL.iter().find(|c| c.name() == s) {
            Some(&c) => Ok(c),
            None => bail!("unknown command {s:?}"),
        }
    }
}

/// Runs `command` on a pool of `cfg.workers` threads and wraps the output.
pub fn run(command: Command, cfg: &RunConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .context("building worker pool")?;
    let started_unix_seconds = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let clock = Instant::now();
    let out = pool.install(|| match command {
        Command::Hypopt => commands::cmd_hypopt(cfg),
        Command::Vqe => commands::cmd_vqe(cfg),
        Command::Qml => commands::cmd_qml(cfg),
        Command::GradProfile => commands::cmd_grad_profile(cfg),
        Command::BpScan => commands::cmd_bp_scan(cfg),
    })?;
    let workers = pool.current_num_threads();

    let mut config = serde_json::to_value(cfg)?;
    if let Some(obj) = config.as_object_mut() {
        obj.remove("workers");
    }
    let content = Content {
        command: command.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config,
        results: out.results,
    };
    let meta = Meta {
        workers,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        started_unix_seconds,
    };
    RunRecord::new(content, meta, out.tables)
}
