use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use oscinv::DampingRegime;

use crate::params::read_config;

/// Samples the exact solution described by a config file and writes a trajectory CSV.
#[derive(Args)]
pub struct Opts {
    /// Simulation config JSON.
    #[arg(long)]
    config: PathBuf,
    /// Output trajectory CSV.
    #[arg(long)]
    out: PathBuf,
    /// Noise seed; overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

pub fn run(opts: Opts) -> Result<()> {
    let mut cfg = read_config(&opts.config)?;
    if opts.seed.is_some() {
        cfg.seed = opts.seed;
    }
    let params = cfg.params().context("invalid config")?;
    let traj = cfg.simulate().context("simulation failed")?;
    oscinv::trajectory::write_csv(&traj, &opts.out).with_context(|| format!("writing {}", opts.out.display()))?;
    for k in 0..params.dim() {
        let f = params.derived_frequency(k);
        match f.regime {
            DampingRegime::Underdamped => println!("axis {}: {} (omega = {})", k + 1, f.regime, f.value),
            DampingRegime::Overdamped => println!("axis {}: {} (zeta = {})", k + 1, f.regime, f.value),
            DampingRegime::Critical => println!("axis {}: {}", k + 1, f.regime),
        }
    }
    Ok(())
}
