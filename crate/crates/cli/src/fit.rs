use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use oscinv::fjet::{extrapolate_to_zero, fit_feature_regression, FeatureSet, FitReport};
use oscinv::trajectory::build_delta_dataset;

use crate::params::{emit_json, read_trajectory};

/// Fits FJet models at several strides and extrapolates them to recover the equation of motion.
#[derive(Args)]
pub struct Opts {
    /// Input trajectory CSV.
    #[arg(long)]
    traj: PathBuf,
    /// Strides in samples: a list (`1,2,5`) or an inclusive range (`1..10`).
    #[arg(long, default_value = "1..10")]
    strides: String,
    /// Output JSON report.
    #[arg(long)]
    out: PathBuf,
    /// Feature dictionary: `quadratic` ({u, v, u², uv, v²}) or `linear`.
    #[arg(long, default_value = "quadratic")]
    features: String,
    /// Drop samples after the state norm decays below this fraction of its initial value (0 keeps all).
    #[arg(long, default_value_t = 1e-3)]
    decay_floor: f64,
}

pub fn parse_strides(s: &str) -> Result<Vec<usize>> {
    let strides: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().with_context(|| format!("bad stride range '{s}'"))?;
        let b: usize = b.trim().parse().with_context(|| format!("bad stride range '{s}'"))?;
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|x| x.trim().parse().with_context(|| format!("bad stride '{x}'")))
            .collect::<Result<_>>()?
    };
    if strides.contains(&0) {
        bail!("strides must be positive");
    }
    Ok(strides)
}

pub fn run(opts: Opts) -> Result<()> {
    let strides = parse_strides(&opts.strides)?;
    if strides.len() < 3 {
        bail!("at least 3 strides required, got {}", strides.len());
    }
    let features = match opts.features.as_str() {
        "quadratic" => FeatureSet::quadratic(),
        "linear" => FeatureSet::linear(),
        other => bail!("unknown feature set '{other}' (expected quadratic or linear)"),
    };
    let mut traj = read_trajectory(&opts.traj)?;
    if opts.decay_floor > 0.0 {
        traj = traj.truncate_on_decay(opts.decay_floor);
    }
    let models = strides
        .iter()
        .map(|&s| {
            let ds = build_delta_dataset(&traj, s)?;
            fit_feature_regression(&ds, &features)
        })
        .collect::<oscinv::Result<Vec<_>>>()
        .context("feature regression failed")?;
    let estimate = extrapolate_to_zero(&models).context("extrapolation failed")?;
    for (k, a) in estimate.axes.iter().enumerate() {
        let flag = if a.is_flagged() {
            format!(" [flagged: {}]", a.flags.join("; "))
        } else {
            String::new()
        };
        println!(
            "axis {}: omega0^2 = {}, 2gamma = {}{flag}",
            k + 1,
            a.omega0_sq,
            a.two_gamma
        );
    }
    emit_json(&FitReport { models, estimate }, Some(&opts.out))
}
