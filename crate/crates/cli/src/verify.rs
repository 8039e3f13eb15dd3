use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use oscinv::verify::{energy_budget, ConstancyReport};
use oscinv::{DampingRegime, OscParamsF64};
use serde::Serialize;

use crate::params::{emit_json, read_trajectory, ParamArgs};
use crate::series::{compute, parse_ratio, Kind};

/// Checks every constant of motion that applies to the parameters along a trajectory.
#[derive(Args)]
pub struct Opts {
    /// Input trajectory CSV.
    #[arg(long)]
    traj: PathBuf,
    #[command(flatten)]
    params: ParamArgs,
    /// Restrict the check to one kind.
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    /// Frequency ratio `a:b` when checking kind comm.
    #[arg(long)]
    ratio: Option<String>,
    /// Output JSON report; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct EnergySummary {
    max_residual: f64,
    max_drift: f64,
    relative_drift: f64,
    trapezoid_relative_drift: f64,
}

#[derive(Serialize)]
struct Report {
    regimes: Vec<String>,
    energy_budget: EnergySummary,
    invariants: BTreeMap<String, ConstancyReport<f64>>,
}

/// `(kind, axis)` pairs that apply to the parameters.
fn applicable(params: &OscParamsF64) -> Vec<(Kind, usize)> {
    let mut out = Vec::new();
    for k in 0..params.dim() {
        let kind = match params.classify_regime(k) {
            DampingRegime::Underdamped => Kind::Under1d,
            DampingRegime::Overdamped => Kind::Over1d,
            DampingRegime::Critical => Kind::Crit1d,
        };
        out.push((kind, k));
        out.push((Kind::Ralt, k));
    }
    let all_under = (0..params.dim()).all(|k| params.classify_regime(k) == DampingRegime::Underdamped);
    if all_under && params.dim() == 2 {
        if params.gamma() == 0.0 {
            out.extend([(Kind::Cr, 0), (Kind::Ci, 0), (Kind::Gam, 0)]);
        } else {
            out.extend([(Kind::Ca, 0), (Kind::Cb, 0)]);
        }
    }
    if all_under && params.dim() >= 3 {
        out.push((Kind::Wedge, 0));
    }
    out
}

pub fn run(opts: Opts) -> Result<()> {
    let params = opts.params.resolve()?;
    let traj = read_trajectory(&opts.traj)?;
    let budget = energy_budget(&traj, &params)?;
    let ratio = opts.ratio.as_deref().map(parse_ratio).transpose()?;
    let checks: Vec<(Kind, usize)> = match opts.kind {
        Some(kind) if is_1d(kind) => (0..params.dim()).map(|k| (kind, k)).collect(),
        Some(kind) => vec![(kind, 0)],
        None => applicable(&params),
    };
    let mut invariants = BTreeMap::new();
    for (kind, axis) in checks {
        let series =
            compute(kind, &params, &traj, axis, ratio).map_err(|e| anyhow::anyhow!("kind {}: {e:#}", kind.name()))?;
        for (col, rep) in series.reports()? {
            let key = match (is_1d(kind), col.as_str()) {
                (true, _) => format!("{}[axis {}]", kind.name(), axis + 1),
                (false, "value") => kind.name().to_string(),
                (false, c) => format!("{}.{c}", kind.name()),
            };
            invariants.insert(key, rep);
        }
    }
    let report = Report {
        regimes: (0..params.dim())
            .map(|k| params.classify_regime(k).to_string())
            .collect(),
        energy_budget: EnergySummary {
            max_residual: budget.max_residual,
            max_drift: budget.max_drift,
            relative_drift: budget.relative_drift,
            trapezoid_relative_drift: budget.trapezoid_relative_drift,
        },
        invariants,
    };
    emit_json(&report, opts.out.as_deref())
}

fn is_1d(kind: Kind) -> bool {
    matches!(kind, Kind::Under1d | Kind::Over1d | Kind::Crit1d | Kind::Ralt)
}
