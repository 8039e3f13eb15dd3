use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use oscinv::grid::{evaluate_grid, GridSpec, Transform};
use oscinv::DampingRegime;

use crate::params::{check_axis, ParamArgs};
use crate::series::Kind;

/// Evaluates a 1D constant of motion on a (u, v) grid and writes `u,v,value` CSV.
#[derive(Args)]
pub struct Opts {
    /// under1d, over1d or crit1d; must match the regime of the parameters. Inferred when omitted.
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    #[command(flatten)]
    params: ParamArgs,
    /// Axis (1-based) whose parameters are used.
    #[arg(long, default_value_t = 1)]
    axis: usize,
    /// Window `u_min,u_max,v_min,v_max`, or a single half-width for a centred square.
    #[arg(long, default_value = "5", allow_hyphen_values = true)]
    window: String,
    /// Resolution `nu,nv`, or a single count for both axes.
    #[arg(long, default_value = "500")]
    res: String,
    /// Riemann sheet (underdamped only).
    #[arg(long, allow_hyphen_values = true)]
    sheet: Option<i64>,
    /// Clamp threshold for the singular factors (regime default when omitted).
    #[arg(long)]
    clamp: Option<f64>,
    /// identity, or exp for r′ = e^r.
    #[arg(long, default_value = "identity")]
    transform: String,
    /// Output grid CSV.
    #[arg(long)]
    out: PathBuf,
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    s.split(',')
        .map(|x| x.trim().parse::<T>().with_context(|| format!("bad {what} value '{x}'")))
        .collect()
}

pub fn build_spec(
    window: &str,
    res: &str,
    sheet: Option<i64>,
    clamp: Option<f64>,
    transform: &str,
) -> Result<GridSpec<f64>> {
    let w: Vec<f64> = parse_list(window, "window")?;
    let (u_min, u_max, v_min, v_max) = match w[..] {
        [h] => (-h, h, -h, h),
        [a, b, c, d] => (a, b, c, d),
        _ => bail!("window needs 1 or 4 numbers, got {}", w.len()),
    };
    let r: Vec<usize> = parse_list(res, "resolution")?;
    let (nu, nv) = match r[..] {
        [n] => (n, n),
        [a, b] => (a, b),
        _ => bail!("resolution needs 1 or 2 numbers, got {}", r.len()),
    };
    let spec = GridSpec {
        u_min,
        u_max,
        v_min,
        v_max,
        nu,
        nv,
        clamp_threshold: clamp,
        sheet,
        transform: transform.parse::<Transform>()?,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn run(opts: Opts) -> Result<()> {
    let params = opts.params.resolve()?;
    let axis = opts.axis.checked_sub(1).context("axes are numbered from 1")?;
    check_axis(&params, axis)?;
    let ap = params.axis(axis);
    let regime = ap.regime();
    if let Some(kind) = opts.kind {
        let required = match kind {
            Kind::Under1d => DampingRegime::Underdamped,
            Kind::Over1d => DampingRegime::Overdamped,
            Kind::Crit1d => DampingRegime::Critical,
            other => bail!("kind {} cannot be gridded; use under1d, over1d or crit1d", other.name()),
        };
        if required != regime {
            bail!("kind {} requires {required} parameters, found {regime}", kind.name());
        }
    }
    let spec = build_spec(&opts.window, &opts.res, opts.sheet, opts.clamp, &opts.transform)?;
    let grid = evaluate_grid(ap, &spec)?;
    grid.write_csv(&opts.out)
        .with_context(|| format!("writing {}", opts.out.display()))?;
    Ok(())
}
