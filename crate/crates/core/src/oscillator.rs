//! Oscillator parameters, damping regimes and closed-form solutions of
//! `ü + 2γu̇ + ω0²u = 0`, applied independently on every axis.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative band around `γ = ω0` inside which an axis is treated as critically damped.
pub const CRITICAL_TOLERANCE: f64 = 1e-12;

/// Physical parameters of an N-dimensional damped oscillator with a shared
/// damping coefficient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscParams<T> {
    omega0: Vec<T>,
    gamma: T,
}

impl<T: Scalar> OscParams<T> {
    pub fn new(omega0: Vec<T>, gamma: T) -> Result<Self> {
        if omega0.is_empty() {
            return Err(Error::InvalidParams("at least one natural frequency required".into()));
        }
        if let Some(k) = omega0.iter().position(|w| !(w.is_finite() && *w > T::zero())) {
            return Err(Error::InvalidParams(format!(
                "omega0[{k}] = {} must be finite and > 0",
                omega0[k]
            )));
        }
        if !(gamma.is_finite() && gamma >= T::zero()) {
            return Err(Error::InvalidParams(format!("gamma = {gamma} must be finite and >= 0")));
        }
        Ok(Self { omega0, gamma })
    }

    pub fn one_d(omega0: T, gamma: T) -> Result<Self> {
        Self::new(vec![omega0], gamma)
    }

    pub fn omega0(&self) -> &[T] {
        &self.omega0
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.omega0.len()
    }

    /// Single-axis view. Panics if `axis >= dim`.
    pub fn axis(&self, axis: usize) -> AxisParams<T> {
        AxisParams {
            omega0: self.omega0[axis],
            gamma: self.gamma,
        }
    }

    pub fn axes(&self) -> impl Iterator<Item = AxisParams<T>> + '_ {
        (0..self.dim()).map(|k| self.axis(k))
    }

    pub fn classify_regime(&self, axis: usize) -> DampingRegime {
        self.axis(axis).regime()
    }

    pub fn derived_frequency(&self, axis: usize) -> DerivedFreq<T> {
        self.axis(axis).derived_frequency()
    }

    pub(crate) fn check_dim(&self, got: usize) -> Result<()> {
        if got == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                got,
            })
        }
    }
}

/// Parameters seen by a single axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisParams<T> {
    omega0: T,
    gamma: T,
}

impl<T: Scalar> AxisParams<T> {
    pub fn new(omega0: T, gamma: T) -> Result<Self> {
        OscParams::one_d(omega0, gamma).map(|p| p.axis(0))
    }

    pub fn omega0(&self) -> T {
        self.omega0
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn regime(&self) -> DampingRegime {
        let tau = T::lit(CRITICAL_TOLERANCE) * self.omega0;
        if (self.gamma - self.omega0).abs() <= tau {
            DampingRegime::Critical
        } else if self.gamma < self.omega0 {
            DampingRegime::Underdamped
        } else {
            DampingRegime::Overdamped
        }
    }

    pub fn derived_frequency(&self) -> DerivedFreq<T> {
        let regime = self.regime();
        let (w0, g) = (self.omega0, self.gamma);
        let value = match regime {
            // (ω0 − γ)(ω0 + γ) avoids cancellation near the critical band
            DampingRegime::Underdamped => ((w0 - g) * (w0 + g)).sqrt(),
            DampingRegime::Overdamped => ((g - w0) * (g + w0)).sqrt(),
            DampingRegime::Critical => T::zero(),
        };
        DerivedFreq { regime, value }
    }

    /// ω = √(ω0² − γ²), or an error naming `operation` when not underdamped.
    pub(crate) fn underdamped_omega(&self, axis: usize, operation: &'static str) -> Result<T> {
        match self.derived_frequency() {
            DerivedFreq {
                regime: DampingRegime::Underdamped,
                value,
            } => Ok(value),
            DerivedFreq { regime, .. } => Err(Error::RegimeMismatch {
                axis,
                operation,
                required: "underdamped",
                found: regime.to_string(),
            }),
        }
    }

    pub(crate) fn overdamped_zeta(&self, operation: &'static str) -> Result<T> {
        match self.derived_frequency() {
            DerivedFreq {
                regime: DampingRegime::Overdamped,
                value,
            } => Ok(value),
            DerivedFreq { regime, .. } => Err(Error::RegimeMismatch {
                axis: 0,
                operation,
                required: "overdamped",
                found: regime.to_string(),
            }),
        }
    }

    pub(crate) fn require_critical(&self, operation: &'static str) -> Result<()> {
        match self.regime() {
            DampingRegime::Critical => Ok(()),
            regime => Err(Error::RegimeMismatch {
                axis: 0,
                operation,
                required: "critical",
                found: regime.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DampingRegime {
    Underdamped,
    Overdamped,
    Critical,
}

impl std::fmt::Display for DampingRegime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DampingRegime::Underdamped => "underdamped",
            DampingRegime::Overdamped => "overdamped",
            DampingRegime::Critical => "critical",
        })
    }
}

/// ω (underdamped), ζ (overdamped) or 0 (critical).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedFreq<T> {
    pub regime: DampingRegime,
    pub value: T,
}

impl<T: Scalar> DerivedFreq<T> {
    /// Eigenvalues `λ± = −γ ± iω` as `(re, im)` pairs; for the overdamped case
    /// both are real, `−γ ± ζ`.
    pub fn eigenvalues(&self, gamma: T) -> [(T, T); 2] {
        match self.regime {
            DampingRegime::Underdamped => [(-gamma, self.value), (-gamma, -self.value)],
            DampingRegime::Overdamped => [(-gamma + self.value, T::zero()), (-gamma - self.value, T::zero())],
            DampingRegime::Critical => [(-gamma, T::zero()), (-gamma, T::zero())],
        }
    }
}

/// Position and velocity of one axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint<T> {
    pub u: T,
    pub v: T,
}

impl<T: Scalar> PhasePoint<T> {
    pub fn new(u: T, v: T) -> Self {
        Self { u, v }
    }

    pub fn is_origin(&self) -> bool {
        self.u == T::zero() && self.v == T::zero()
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.u - other.u).hypot(self.v - other.v)
    }
}

/// Phase-space point of an N-dimensional oscillator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct State<T> {
    pub u: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Scalar> State<T> {
    pub fn new(u: Vec<T>, v: Vec<T>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch {
                expected: u.len(),
                got: v.len(),
            });
        }
        if u.is_empty() {
            return Err(Error::InvalidParams("state must have at least one axis".into()));
        }
        Ok(Self { u, v })
    }

    pub fn one_d(u: T, v: T) -> Self {
        Self { u: vec![u], v: vec![v] }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            u: vec![T::zero(); dim],
            v: vec![T::zero(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn axis(&self, k: usize) -> PhasePoint<T> {
        PhasePoint {
            u: self.u[k],
            v: self.v[k],
        }
    }

    pub fn axes(&self) -> impl Iterator<Item = PhasePoint<T>> + '_ {
        self.u.iter().zip(&self.v).map(|(&u, &v)| PhasePoint { u, v })
    }

    /// Euclidean norm over all `u_k, v_k`.
    pub fn norm(&self) -> T {
        self.u
            .iter()
            .chain(&self.v)
            .fold(T::zero(), |acc, &x| acc + x * x)
            .sqrt()
    }

    /// Maximum-norm distance between two states of equal dimension.
    pub fn max_distance(&self, other: &Self) -> T {
        self.axes()
            .zip(other.axes())
            .map(|(a, b)| a.distance(&b))
            .fold(T::zero(), T::max)
    }
}

/// Closed-form coefficients for one axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum AxisSolution<T> {
    /// `u = e^{−γt}[A cos ωt + B sin ωt]`
    Underdamped { a: T, b: T, omega: T },
    /// `u = A e^{(−γ+ζ)t} + B e^{(−γ−ζ)t}`
    Overdamped { a: T, b: T, zeta: T },
    /// `u = (A + Bt) e^{−γt}`
    Critical { a: T, b: T },
}

impl<T: Scalar> AxisSolution<T> {
    pub fn from_initial(params: AxisParams<T>, u0: T, v0: T) -> Self {
        let g = params.gamma();
        let freq = params.derived_frequency();
        let w0 = g * u0 + v0;
        match freq.regime {
            DampingRegime::Underdamped => AxisSolution::Underdamped {
                a: u0,
                b: w0 / freq.value,
                omega: freq.value,
            },
            DampingRegime::Overdamped => {
                let z = freq.value;
                let two_z = T::two() * z;
                AxisSolution::Overdamped {
                    a: (z * u0 + w0) / two_z,
                    b: (z * u0 - w0) / two_z,
                    zeta: z,
                }
            }
            DampingRegime::Critical => AxisSolution::Critical { a: u0, b: w0 },
        }
    }

    pub fn regime(&self) -> DampingRegime {
        match self {
            AxisSolution::Underdamped { .. } => DampingRegime::Underdamped,
            AxisSolution::Overdamped { .. } => DampingRegime::Overdamped,
            AxisSolution::Critical { .. } => DampingRegime::Critical,
        }
    }

    /// `(u, u̇, ü)` at time `t`, all from analytic derivatives.
    pub fn evaluate_with_acceleration(&self, gamma: T, t: T) -> (T, T, T) {
        match *self {
            AxisSolution::Underdamped { a, b, omega } => {
                let decay = (-gamma * t).exp();
                let (s, c) = (omega * t).sin_cos();
                // derivative of e^{−γt}[P cos + Q sin] is e^{−γt}[(−γP + ωQ) cos + (−γQ − ωP) sin]
                let deriv = |p: T, q: T| (-gamma * p + omega * q, -gamma * q - omega * p);
                let (pv, qv) = deriv(a, b);
                let (pa, qa) = deriv(pv, qv);
                (
                    decay * (a * c + b * s),
                    decay * (pv * c + qv * s),
                    decay * (pa * c + qa * s),
                )
            }
            AxisSolution::Overdamped { a, b, zeta } => {
                let lp = -gamma + zeta;
                let lm = -gamma - zeta;
                let ep = a * (lp * t).exp();
                let em = b * (lm * t).exp();
                (ep + em, lp * ep + lm * em, lp * lp * ep + lm * lm * em)
            }
            AxisSolution::Critical { a, b } => {
                let decay = (-gamma * t).exp();
                let lin = a + b * t;
                let vel = b - gamma * lin;
                let acc = -gamma * b - gamma * vel;
                (decay * lin, decay * vel, decay * acc)
            }
        }
    }

    /// Amplitude/phase form `u = R e^{−γt} cos(ωt − β)` for underdamped axes.
    pub fn amplitude_phase(&self) -> Option<(T, T)> {
        match *self {
            AxisSolution::Underdamped { a, b, .. } => Some((a.hypot(b), b.atan2(a))),
            _ => None,
        }
    }
}

/// Exact solution of every axis for a given initial state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactSolution<T> {
    params: OscParams<T>,
    axes: Vec<AxisSolution<T>>,
}

impl<T: Scalar> ExactSolution<T> {
    pub fn from_initial(params: &OscParams<T>, u0: &[T], v0: &[T]) -> Result<Self> {
        params.check_dim(u0.len())?;
        params.check_dim(v0.len())?;
        let axes = params
            .axes()
            .zip(u0.iter().zip(v0))
            .map(|(ap, (&u, &v))| AxisSolution::from_initial(ap, u, v))
            .collect();
        Ok(Self {
            params: params.clone(),
            axes,
        })
    }

    pub fn params(&self) -> &OscParams<T> {
        &self.params
    }

    pub fn axis(&self, k: usize) -> &AxisSolution<T> {
        &self.axes[k]
    }

    pub fn axes(&self) -> &[AxisSolution<T>] {
        &self.axes
    }

    pub fn evaluate(&self, t: T) -> State<T> {
        let g = self.params.gamma();
        let (u, v) = self
            .axes
            .iter()
            .map(|ax| {
                let (u, v, _) = ax.evaluate_with_acceleration(g, t);
                (u, v)
            })
            .unzip();
        State { u, v }
    }

    /// State plus analytic second derivative of each `u_k`.
    pub fn evaluate_with_acceleration(&self, t: T) -> (State<T>, Vec<T>) {
        let g = self.params.gamma();
        let mut state = State::zeros(self.axes.len());
        let mut acc = Vec::with_capacity(self.axes.len());
        for (k, ax) in self.axes.iter().enumerate() {
            let (u, v, a) = ax.evaluate_with_acceleration(g, t);
            state.u[k] = u;
            state.v[k] = v;
            acc.push(a);
        }
        (state, acc)
    }

    /// `(A_k, β_k)` of `u_k = A_k e^{−γt} cos(ω_k t − β_k)`; `None` for axes that do not oscillate.
    pub fn amplitude_phase(&self, k: usize) -> Option<(T, T)> {
        self.axes[k].amplitude_phase()
    }
}
