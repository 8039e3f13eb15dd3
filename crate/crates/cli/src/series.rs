use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use oscinv::invariants_1d::{r_alternative, r_critical, r_overdamped, r_underdamped_series};
use oscinv::invariants_nd::{
    c_a_damped, c_b_damped, c_i_undamped, c_r_undamped, commensurate_invariant, generalized_angular_momentum,
    mode_frequencies, track_modes, wedge_constants, ModeQuantities,
};
use oscinv::verify::{constancy, ConstancyReport};
use oscinv::{OscParamsF64, TrajectoryF64};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// Underdamped 1D constant r, with sheet tracking.
    Under1d,
    /// Overdamped 1D constant r.
    Over1d,
    /// Critically damped 1D constant r.
    Crit1d,
    /// Time-explicit r′ = ½[(ω0² − γ²)u² + w²]e^{2γt}, any regime.
    Ralt,
    /// C_R, undamped 2D.
    Cr,
    /// C_I, undamped 2D.
    Ci,
    /// C_A, damped 2D.
    Ca,
    /// C_B, damped 2D.
    Cb,
    /// sin of the commensurate angle (needs --ratio).
    Comm,
    /// Generalized angular momentum C′, undamped 2D.
    Gam,
    /// Wedge constants C(i, j) = ω_iφ_j − ω_jφ_i, N-D.
    Wedge,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Under1d => "under1d",
            Kind::Over1d => "over1d",
            Kind::Crit1d => "crit1d",
            Kind::Ralt => "ralt",
            Kind::Cr => "cr",
            Kind::Ci => "ci",
            Kind::Ca => "ca",
            Kind::Cb => "cb",
            Kind::Comm => "comm",
            Kind::Gam => "gam",
            Kind::Wedge => "wedge",
        }
    }
}

/// Parses `a:b`.
pub fn parse_ratio(s: &str) -> Result<(u32, u32)> {
    let (a, b) = s
        .split_once(':')
        .with_context(|| format!("ratio '{s}' must look like a:b"))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

/// Invariant values along a trajectory, one column per constant.
#[derive(Debug)]
pub struct Series {
    pub columns: Vec<String>,
    pub t: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl Series {
    fn single(traj: &TrajectoryF64, values: Vec<f64>) -> Self {
        Self {
            columns: vec!["value".into()],
            t: traj.times().collect(),
            values: vec![values],
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (i, t) in self.t.iter().enumerate() {
            let _ = write!(out, "{t}");
            for col in &self.values {
                let _ = write!(out, ",{}", col[i]);
            }
            out.push('\n');
        }
        out
    }

    pub fn reports(&self) -> Result<Vec<(String, ConstancyReport<f64>)>> {
        self.columns
            .iter()
            .zip(&self.values)
            .map(|(c, v)| Ok((c.clone(), constancy(v).with_context(|| format!("column {c}"))?)))
            .collect()
    }
}

pub fn compute(
    kind: Kind,
    params: &OscParamsF64,
    traj: &TrajectoryF64,
    axis: usize,
    ratio: Option<(u32, u32)>,
) -> Result<Series> {
    if params.dim() != traj.dim() {
        bail!(
            "parameters have {} axes but the trajectory has {}",
            params.dim(),
            traj.dim()
        );
    }
    crate::params::check_axis(params, axis)?;
    let ap = params.axis(axis);
    let per_mode = |f: fn(&ModeQuantities<f64>) -> oscinv::Result<f64>| -> Result<Series> {
        let modes = track_modes(params, traj)?;
        let values = modes.iter().map(f).collect::<oscinv::Result<Vec<_>>>()?;
        Ok(Series::single(traj, values))
    };
    let series = match kind {
        Kind::Under1d => Series::single(traj, r_underdamped_series(ap, traj, axis)?),
        Kind::Over1d => Series::single(
            traj,
            traj.states()
                .map(|s| r_overdamped(ap, s.axis(axis)))
                .collect::<oscinv::Result<_>>()?,
        ),
        Kind::Crit1d => Series::single(
            traj,
            traj.states()
                .map(|s| r_critical(ap, s.axis(axis)))
                .collect::<oscinv::Result<_>>()?,
        ),
        Kind::Ralt => Series::single(
            traj,
            traj.samples()
                .iter()
                .map(|s| r_alternative(ap, s.state.axis(axis), s.t))
                .collect(),
        ),
        Kind::Cr => per_mode(c_r_undamped)?,
        Kind::Ci => per_mode(c_i_undamped)?,
        Kind::Ca => per_mode(c_a_damped)?,
        Kind::Cb => per_mode(c_b_damped)?,
        Kind::Gam => per_mode(generalized_angular_momentum)?,
        Kind::Comm => {
            let (a, b) = ratio.context("kind comm needs --ratio a:b")?;
            let omega_bar = mode_frequencies(params)?[0] / f64::from(a);
            let modes = track_modes(params, traj)?;
            let vals = modes
                .iter()
                .map(|m| commensurate_invariant(m, a, b, omega_bar))
                .collect::<oscinv::Result<Vec<_>>>()?;
            let mut columns = vec!["value".to_string()];
            let mut values = vec![vals.iter().map(|v| v.phase_route).collect::<Vec<_>>()];
            if vals.iter().all(|v| v.polynomial_route.is_some()) {
                columns.push("polynomial".into());
                values.push(vals.iter().filter_map(|v| v.polynomial_route).collect());
            }
            Series {
                columns,
                t: traj.times().collect(),
                values,
            }
        }
        Kind::Wedge => {
            let modes = track_modes(params, traj)?;
            let tables = modes.iter().map(wedge_constants).collect::<oscinv::Result<Vec<_>>>()?;
            let n = params.dim();
            let mut columns = Vec::new();
            let mut values = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    columns.push(format!("c{}_{}", i + 1, j + 1));
                    values.push(tables.iter().map(|w| w.get(i, j)).collect());
                }
            }
            if columns.is_empty() {
                bail!("wedge constants need at least 2 axes");
            }
            Series {
                columns,
                t: traj.times().collect(),
                values,
            }
        }
    };
    Ok(series)
}
