use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use oscinv::{OscParamsF64, SimulationConfig};

/// Oscillator parameters, from flags or from the `omega0`/`gamma` keys of a config file.
#[derive(Args, Debug, Clone)]
pub struct ParamArgs {
    /// Natural frequency per axis (comma-separated for several axes).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub omega0: Vec<f64>,
    /// Damping rate shared by all axes.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Simulation config JSON to take parameters from; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl ParamArgs {
    pub fn resolve(&self) -> Result<OscParamsF64> {
        let cfg = self.config.as_deref().map(read_config).transpose()?;
        let omega0 = match (&self.omega0[..], &cfg) {
            ([], Some(c)) => c.omega0.clone(),
            ([], None) => bail!("missing parameters: pass --omega0 and --gamma, or --config"),
            (w, _) => w.to_vec(),
        };
        let gamma = match (self.gamma, &cfg) {
            (Some(g), _) => g,
            (None, Some(c)) => c.gamma,
            (None, None) => bail!("missing parameter: --gamma"),
        };
        Ok(OscParamsF64::new(omega0, gamma)?)
    }
}

pub fn read_config(path: &Path) -> Result<SimulationConfig<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

pub fn read_trajectory(path: &Path) -> Result<oscinv::TrajectoryF64> {
    oscinv::trajectory::read_csv(path).with_context(|| format!("reading trajectory {}", path.display()))
}

pub fn check_axis(params: &OscParamsF64, axis: usize) -> Result<()> {
    if axis >= params.dim() {
        bail!("axis {} out of range for {} axes", axis + 1, params.dim());
    }
    Ok(())
}

/// Writes JSON to `path`, or to standard output when `path` is `None`.
pub fn emit_json<S: serde::Serialize>(value: &S, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}
