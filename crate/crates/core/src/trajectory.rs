//! Time series generation, FJet Δ-datasets and trajectory persistence.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oscillator::{ExactSolution, OscParams, PhasePoint, State};
use crate::scalar::Scalar;

/// Relative tolerance for uniform spacing of timestamps read from disk.
const SPACING_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample<T> {
    pub t: T,
    pub state: State<T>,
}

/// Uniformly spaced samples of one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory<T> {
    dt: T,
    samples: Vec<Sample<T>>,
}

impl<T: Scalar> Trajectory<T> {
    /// Validates non-empty samples of equal dimension, increasing in time with spacing `dt`.
    pub fn new(dt: T, samples: Vec<Sample<T>>) -> Result<Self> {
        if !(dt.is_finite() && dt > T::zero()) {
            return Err(Error::InvalidParams(format!("dt = {dt} must be > 0")));
        }
        let first = samples
            .first()
            .ok_or_else(|| Error::InsufficientData("trajectory has no samples".into()))?;
        let dim = first.state.dim();
        let t0 = first.t;
        for (i, s) in samples.iter().enumerate() {
            if s.state.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: s.state.dim(),
                });
            }
            let expected = t0 + T::from_count(i) * dt;
            let tol = T::lit(SPACING_TOLERANCE) * dt.max(expected.abs());
            if (s.t - expected).abs() > tol {
                return Err(Error::InvalidParams(format!(
                    "sample {i} at t = {} breaks uniform spacing {dt}",
                    s.t
                )));
            }
        }
        Ok(Self { dt, samples })
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn samples(&self) -> &[Sample<T>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples[0].state.dim()
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    pub fn states(&self) -> impl Iterator<Item = &State<T>> + '_ {
        self.samples.iter().map(|s| &s.state)
    }

    /// Samples of one axis as phase points.
    pub fn axis_points(&self, k: usize) -> Vec<PhasePoint<T>> {
        self.samples.iter().map(|s| s.state.axis(k)).collect()
    }

    /// Same samples with the time origin moved by `offset`.
    pub fn shift_time(&self, offset: T) -> Self {
        let samples = self
            .samples
            .iter()
            .map(|s| Sample {
                t: s.t + offset,
                state: s.state.clone(),
            })
            .collect();
        Self { dt: self.dt, samples }
    }

    /// Prefix of samples while the state norm stays above `fraction` of its initial value.
    pub fn truncate_on_decay(&self, fraction: T) -> Self {
        let n0 = self.samples[0].state.norm();
        let keep = self
            .samples
            .iter()
            .position(|s| s.state.norm() < fraction * n0)
            .unwrap_or(self.samples.len())
            .max(1);
        Self {
            dt: self.dt,
            samples: self.samples[..keep].to_vec(),
        }
    }
}

/// Additive Gaussian measurement noise applied to sampled states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

fn check_step<T: Scalar>(dt: T) -> Result<()> {
    if dt.is_finite() && dt > T::zero() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("dt = {dt} must be > 0")))
    }
}

/// Samples the exact solution at `t = 0, dt, …, n_steps·dt`.
pub fn sample_exact<T: Scalar>(
    params: &OscParams<T>,
    u0: &[T],
    v0: &[T],
    dt: T,
    n_steps: usize,
) -> Result<Trajectory<T>> {
    check_step(dt)?;
    let sol = ExactSolution::from_initial(params, u0, v0)?;
    let samples = (0..=n_steps)
        .map(|i| {
            let t = T::from_count(i) * dt;
            Sample {
                t,
                state: sol.evaluate(t),
            }
        })
        .collect();
    Trajectory::new(dt, samples)
}

/// [`sample_exact`] followed by seeded i.i.d. Gaussian noise on every `u_k, v_k`.
pub fn sample_exact_noisy<T: Scalar>(
    params: &OscParams<T>,
    u0: &[T],
    v0: &[T],
    dt: T,
    n_steps: usize,
    noise: NoiseSpec,
) -> Result<Trajectory<T>> {
    let mut traj = sample_exact(params, u0, v0, dt, n_steps)?;
    if noise.sigma > 0.0 {
        let normal = Normal::new(0.0, noise.sigma).map_err(|e| Error::InvalidParams(format!("noise sigma: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        for s in &mut traj.samples {
            for x in s.state.u.iter_mut().chain(s.state.v.iter_mut()) {
                *x = *x + T::lit(normal.sample(&mut rng));
            }
        }
    } else if noise.sigma < 0.0 || noise.sigma.is_nan() {
        return Err(Error::InvalidParams(format!(
            "noise sigma = {} must be >= 0",
            noise.sigma
        )));
    }
    Ok(traj)
}

/// Classical fourth-order Runge–Kutta on `u̇ = v, v̇ = −ω0²u − 2γv`.
pub fn integrate_rk4<T: Scalar>(
    params: &OscParams<T>,
    u0: &[T],
    v0: &[T],
    dt: T,
    n_steps: usize,
) -> Result<Trajectory<T>> {
    check_step(dt)?;
    params.check_dim(u0.len())?;
    params.check_dim(v0.len())?;
    let g2 = T::two() * params.gamma();
    let half = T::half();
    let sixth = T::one() / T::lit(6.0);
    let mut samples = Vec::with_capacity(n_steps + 1);
    let mut state = State::new(u0.to_vec(), v0.to_vec())?;
    samples.push(Sample {
        t: T::zero(),
        state: state.clone(),
    });
    for i in 1..=n_steps {
        for (k, &w0) in params.omega0().iter().enumerate() {
            let w0sq = w0 * w0;
            let f = |u: T, v: T| (v, -w0sq * u - g2 * v);
            let (u, v) = (state.u[k], state.v[k]);
            let k1 = f(u, v);
            let k2 = f(u + half * dt * k1.0, v + half * dt * k1.1);
            let k3 = f(u + half * dt * k2.0, v + half * dt * k2.1);
            let k4 = f(u + dt * k3.0, v + dt * k3.1);
            state.u[k] = u + dt * sixth * (k1.0 + T::two() * (k2.0 + k3.0) + k4.0);
            state.v[k] = v + dt * sixth * (k1.1 + T::two() * (k2.1 + k3.1) + k4.1);
        }
        samples.push(Sample {
            t: T::from_count(i) * dt,
            state: state.clone(),
        });
    }
    Trajectory::new(dt, samples)
}

/// One row of a Δ-dataset: the state at `t` and its change over `ε`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaRow<T> {
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub du: Vec<T>,
    pub dv: Vec<T>,
}

/// Pairs `(state(t), state(t + ε) − state(t))`; time itself is dropped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaDataset<T> {
    pub eps: T,
    pub rows: Vec<DeltaRow<T>>,
}

impl<T: Scalar> DeltaDataset<T> {
    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, |r| r.u.len())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Builds the Δ-dataset for `ε = stride·dt`.
pub fn build_delta_dataset<T: Scalar>(traj: &Trajectory<T>, stride: usize) -> Result<DeltaDataset<T>> {
    let n = traj.len();
    if stride == 0 || stride >= n {
        return Err(Error::InvalidWindow(format!(
            "stride {stride} must be in 1..{n} for {n} samples"
        )));
    }
    let rows = traj
        .samples
        .iter()
        .zip(&traj.samples[stride..])
        .map(|(a, b)| {
            let diff = |x: &[T], y: &[T]| x.iter().zip(y).map(|(&p, &q)| q - p).collect();
            DeltaRow {
                u: a.state.u.clone(),
                v: a.state.v.clone(),
                du: diff(&a.state.u, &b.state.u),
                dv: diff(&a.state.v, &b.state.v),
            }
        })
        .collect();
    Ok(DeltaDataset {
        eps: T::from_count(stride) * traj.dt,
        rows,
    })
}

fn csv_header(dim: usize) -> String {
    let mut h = String::from("t");
    for k in 1..=dim {
        let _ = write!(h, ",u{k},v{k}");
    }
    h
}

/// Serializes to CSV. Floats use the shortest representation that round-trips.
pub fn to_csv_string<T: Scalar>(traj: &Trajectory<T>) -> String {
    let mut out = csv_header(traj.dim());
    out.push('\n');
    for s in &traj.samples {
        let _ = write!(out, "{}", s.t);
        for (u, v) in s.state.u.iter().zip(&s.state.v) {
            let _ = write!(out, ",{u},{v}");
        }
        out.push('\n');
    }
    out
}

pub fn write_csv<T: Scalar>(traj: &Trajectory<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_csv_string(traj))?;
    Ok(())
}

pub fn read_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<Trajectory<T>> {
    parse_csv(&fs::read_to_string(path)?)
}

/// Parses the trajectory CSV format (`t,u1,v1[,u2,v2,...]`).
pub fn parse_csv<T: Scalar>(text: &str) -> Result<Trajectory<T>> {
    let mut lines = text.split('\n').enumerate();
    let (_, header) = lines.next().filter(|(_, h)| !h.trim().is_empty()).ok_or(Error::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    let fields: Vec<&str> = header.split(',').collect();
    if fields.len() < 3 || fields.len().is_multiple_of(2) {
        return Err(Error::Parse {
            line: 1,
            message: format!("malformed header `{header}`"),
        });
    }
    let dim = (fields.len() - 1) / 2;
    if header != csv_header(dim) {
        return Err(Error::Parse {
            line: 1,
            message: format!("header `{header}` does not match `{}`", csv_header(dim)),
        });
    }

    let mut samples: Vec<Sample<T>> = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let values = line
            .split(',')
            .map(|f| f.parse::<T>())
            .collect::<std::result::Result<Vec<T>, _>>()
            .map_err(|e| Error::Parse {
                line: lineno,
                message: e.to_string(),
            })?;
        if values.len() != fields.len() {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {} fields, found {}", fields.len(), values.len()),
            });
        }
        let t = values[0];
        if let Some(prev) = samples.last() {
            if !(t > prev.t) {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("time {t} is not increasing"),
                });
            }
        }
        let u = values[1..].iter().step_by(2).copied().collect();
        let v = values[2..].iter().step_by(2).copied().collect();
        samples.push(Sample {
            t,
            state: State { u, v },
        });
    }
    if samples.len() < 2 {
        return Err(Error::Parse {
            line: samples.len() + 1,
            message: "at least two samples required to infer the time step".into(),
        });
    }
    let n = samples.len();
    let dt = (samples[n - 1].t - samples[0].t) / T::from_count(n - 1);
    Trajectory::new(dt, samples).map_err(|e| Error::Parse {
        line: 0,
        message: e.to_string(),
    })
}

/// Simulation configuration as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig<T> {
    pub omega0: Vec<T>,
    pub gamma: T,
    pub u0: Vec<T>,
    pub v0: Vec<T>,
    pub dt: T,
    pub n_steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl<T: Scalar> SimulationConfig<T> {
    pub fn params(&self) -> Result<OscParams<T>> {
        OscParams::new(self.omega0.clone(), self.gamma)
    }

    /// Exact-solution trajectory, with noise when `noise_sigma` is set.
    pub fn simulate(&self) -> Result<Trajectory<T>> {
        let params = self.params()?;
        match self.noise_sigma {
            Some(sigma) if sigma != 0.0 => sample_exact_noisy(
                &params,
                &self.u0,
                &self.v0,
                self.dt,
                self.n_steps,
                NoiseSpec {
                    sigma,
                    seed: self.seed.unwrap_or(0),
                },
            ),
            _ => sample_exact(&params, &self.u0, &self.v0, self.dt, self.n_steps),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn light_damping() -> OscParams<f64> {
        OscParams::<f64>::one_d(1.0, 0.1).unwrap()
    }

    #[test]
    fn sample_counts() {
        let tr = sample_exact(&light_damping(), &[1.5], &[-2.5827], 0.3, 60).unwrap();
        assert_eq!(tr.len(), 61);
        assert!((tr.samples()[60].t - 18.0).abs() < 1e-12);
        let tr = sample_exact(&light_damping(), &[1.5], &[-2.5827], 0.7, 1).unwrap();
        assert_eq!(tr.len(), 2);
        let exact = ExactSolution::from_initial(&light_damping(), &[1.5], &[-2.5827])
            .unwrap()
            .evaluate(0.7);
        assert_eq!(tr.samples()[1].state, exact);
    }

    #[test]
    fn rk4_matches_cosine() {
        let p = OscParams::<f64>::one_d(1.0, 0.0).unwrap();
        let tr = integrate_rk4(&p, &[1.0], &[0.0], 0.01, 500).unwrap();
        let last = tr.samples().last().unwrap();
        assert!((last.state.u[0] - 5f64.cos()).abs() < 1e-7);
        let tr = integrate_rk4(&p, &[1.0], &[0.0], 0.01, 0).unwrap();
        assert_eq!(tr.len(), 1);
    }

    #[test]
    fn rk4_against_exact_solution() {
        let sets = [
            (OscParams::<f64>::one_d(1.0, 0.1).unwrap(), 1.5, -2.5827),
            (OscParams::<f64>::one_d(1.0, 1.1).unwrap(), -1.75, -3.99),
            (OscParams::<f64>::one_d(1.0, 1.0).unwrap(), -1.58, -3.99),
        ];
        for (p, u0, v0) in sets {
            let rk = integrate_rk4(&p, &[u0], &[v0], 1e-3, 10_000).unwrap();
            let ex = sample_exact(&p, &[u0], &[v0], 1e-3, 10_000).unwrap();
            let worst = rk
                .states()
                .zip(ex.states())
                .map(|(a, b)| a.max_distance(b))
                .fold(0.0, f64::max);
            assert!(worst < 1e-9, "max distance {worst}");
            if p.gamma() == 0.1 {
                assert!(worst < 1e-10);
            }
        }
    }

    #[test]
    fn delta_dataset_shapes_and_values() {
        let p = light_damping();
        let zero = sample_exact(&p, &[0.0], &[0.0], 0.1, 10).unwrap();
        let ds = build_delta_dataset(&zero, 3).unwrap();
        assert!(ds.rows.iter().all(|r| r.du[0] == 0.0 && r.dv[0] == 0.0));

        let three = sample_exact(&p, &[1.0], &[0.0], 0.1, 2).unwrap();
        assert_eq!(build_delta_dataset(&three, 1).unwrap().len(), 2);
        assert!(matches!(build_delta_dataset(&three, 3), Err(Error::InvalidWindow(_))));
        assert!(matches!(build_delta_dataset(&three, 0), Err(Error::InvalidWindow(_))));
    }

    #[test]
    fn delta_rows_follow_the_vector_field() {
        let p = light_damping();
        let eps = 0.3;
        let tr = sample_exact(&p, &[1.5], &[-2.5827], eps, 60).unwrap();
        let ds = build_delta_dataset(&tr, 1).unwrap();
        for (row, (a, b)) in ds.rows.iter().zip(tr.samples().iter().zip(&tr.samples()[1..])) {
            assert_eq!(row.du[0], b.state.u[0] - a.state.u[0]);
            let first_order = (-row.u[0] - 0.2 * row.v[0]) * eps;
            let scale = row.u[0].abs().max(row.v[0].abs());
            assert!((row.dv[0] - first_order).abs() < 5.0 * eps * eps * scale);
        }
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let p = OscParams::<f64>::new(vec![1.0, 1.3], 0.1).unwrap();
        let tr = sample_exact(&p, &[1.0, -0.5], &[0.2, 0.7], 0.1, 20).unwrap();
        let text = to_csv_string(&tr);
        assert!(text.starts_with("t,u1,v1,u2,v2\n"));
        let back: Trajectory<f64> = parse_csv(&text).unwrap();
        assert_eq!(back.samples(), tr.samples());

        assert!(matches!(parse_csv::<f64>(""), Err(Error::Parse { line: 1, .. })));
        let ragged = "t,u1,v1\n0,1,2,3,4\n0.1,1,2,3,4\n";
        assert!(matches!(parse_csv::<f64>(ragged), Err(Error::Parse { line: 2, .. })));
        let backwards = "t,u1,v1\n0,1,2\n0.1,1,2\n0.05,1,2\n";
        assert!(matches!(parse_csv::<f64>(backwards), Err(Error::Parse { line: 4, .. })));
        assert!(matches!(
            parse_csv::<f64>("t,x1,v1\n0,1,2\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_csv::<f64>("t,u1,v1\n0,1,abc\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn noise_is_seeded() {
        let p = light_damping();
        let spec = NoiseSpec { sigma: 1e-4, seed: 7 };
        let a = sample_exact_noisy(&p, &[1.0], &[0.0], 0.1, 50, spec).unwrap();
        let b = sample_exact_noisy(&p, &[1.0], &[0.0], 0.1, 50, spec).unwrap();
        let clean = sample_exact(&p, &[1.0], &[0.0], 0.1, 50).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, clean);
        let dev = a
            .states()
            .zip(clean.states())
            .map(|(x, y)| x.max_distance(y))
            .fold(0.0, f64::max);
        assert!(dev > 0.0 && dev < 1e-3);
    }

    #[test]
    fn config_parses() {
        let json = r#"{"omega0":[1.0],"gamma":0.1,"u0":[1.5],"v0":[-2.5827],"dt":0.3,"n_steps":60}"#;
        let cfg: SimulationConfig<f64> = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.simulate().unwrap().len(), 61);
        let bad = r#"{"omega0":[1.0],"gamma":-0.1,"u0":[1.5],"v0":[0.0],"dt":0.3,"n_steps":60}"#;
        let cfg: SimulationConfig<f64> = serde_json::from_str(bad).unwrap();
        assert!(cfg.simulate().is_err());
    }

    #[test]
    fn decay_truncation() {
        let p = OscParams::<f64>::one_d(1.0, 0.5).unwrap();
        let tr = sample_exact(&p, &[1.0], &[0.0], 0.1, 400).unwrap();
        let cut = tr.truncate_on_decay(1e-3);
        assert!(cut.len() < tr.len());
        assert!(cut.states().all(|s| s.norm() >= 1e-3));
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_lossless(
            dt in 1e-4f64..1.0,
            vals in proptest::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 2..40),
        ) {
            let samples = vals
                .iter()
                .enumerate()
                .map(|(i, &(u, v))| Sample { t: i as f64 * dt, state: State::one_d(u, v) })
                .collect();
            let tr = Trajectory::new(dt, samples).unwrap();
            let back: Trajectory<f64> = parse_csv(&to_csv_string(&tr)).unwrap();
            prop_assert_eq!(back.samples(), tr.samples());
        }
    }
}
