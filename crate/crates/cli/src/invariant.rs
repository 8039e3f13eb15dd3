use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use crate::params::{emit_json, read_trajectory, ParamArgs};
use crate::series::{compute, parse_ratio, Kind};

/// Evaluates a constant of motion at every trajectory sample and writes `t,value` CSV.
#[derive(Args)]
pub struct Opts {
    /// Input trajectory CSV.
    #[arg(long)]
    traj: PathBuf,
    /// Which constant to evaluate.
    #[arg(long, value_enum)]
    kind: Kind,
    #[command(flatten)]
    params: ParamArgs,
    /// Output CSV of per-sample values.
    #[arg(long)]
    out: PathBuf,
    /// Axis (1-based) for the 1D kinds.
    #[arg(long, default_value_t = 1)]
    axis: usize,
    /// Frequency ratio `a:b` for kind comm.
    #[arg(long)]
    ratio: Option<String>,
}

pub fn run(opts: Opts) -> Result<()> {
    let params = opts.params.resolve()?;
    let traj = read_trajectory(&opts.traj)?;
    let ratio = opts.ratio.as_deref().map(parse_ratio).transpose()?;
    let axis = opts.axis.checked_sub(1).context("axes are numbered from 1")?;
    let series =
        compute(opts.kind, &params, &traj, axis, ratio).with_context(|| format!("kind {}", opts.kind.name()))?;
    fs::write(&opts.out, series.to_csv()).with_context(|| format!("writing {}", opts.out.display()))?;
    let reports: BTreeMap<_, _> = series.reports()?.into_iter().collect();
    emit_json(&reports, None)
}
