//! Constants of motion of the 1D damped oscillator in all three regimes,
//! the common integrating factor, and Riemann-sheet phase tracking.
//!
//! Throughout, `w = γu + v`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::oscillator::{AxisParams, DampingRegime, PhasePoint};
use crate::scalar::Scalar;
use crate::trajectory::Trajectory;

/// A principal-value phase in `(−π, π]` together with its Riemann sheet.
///
/// The continuous phase is `raw − 2π·sheet`; phases of the oscillator decrease
/// in time, so crossing the cut at `±π` increments the sheet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnwrappedPhase<T> {
    pub raw: T,
    pub sheet: i64,
}

impl<T: Scalar> UnwrappedPhase<T> {
    pub fn new(raw: T, sheet: i64) -> Self {
        Self { raw, sheet }
    }

    /// Starts tracking on sheet 0.
    pub fn start(raw: T) -> Self {
        Self { raw, sheet: 0 }
    }

    pub fn unwrapped(&self) -> T {
        self.raw - T::two() * T::PI() * T::from_sheet(self.sheet)
    }

    /// Advances to the next raw sample, adjusting the sheet so the unwrapped
    /// phase moves by less than π.
    pub fn advance(&self, raw: T) -> Result<Self> {
        unwrap(*self, raw)
    }
}

/// Folds an `atan2` result into `(−π, π]`.
pub(crate) fn principal<T: Scalar>(angle: T) -> T {
    if angle <= -T::PI() {
        angle + T::two() * T::PI()
    } else {
        angle
    }
}

/// Sheet update for consecutive raw phases.
///
/// Raw jumps below π keep the sheet; jumps above 3π/2 cross the cut; anything
/// in between is ambiguous and rejected.
pub fn unwrap<T: Scalar>(prev: UnwrappedPhase<T>, raw: T) -> Result<UnwrappedPhase<T>> {
    let jump = raw - prev.raw;
    let pi = T::PI();
    let sheet = if jump.abs() < pi {
        prev.sheet
    } else if jump.abs() > T::lit(1.5) * pi {
        if jump > T::zero() {
            prev.sheet + 1
        } else {
            prev.sheet - 1
        }
    } else {
        return Err(Error::AmbiguousPhaseJump {
            jump: jump.to_f64().unwrap_or(f64::NAN),
        });
    };
    Ok(UnwrappedPhase { raw, sheet })
}

/// `atan2(γu + v, ωu)` in `(−π, π]`.
pub fn phase_raw<T: Scalar>(params: AxisParams<T>, p: PhasePoint<T>) -> Result<T> {
    let omega = params.underdamped_omega(0, "phase")?;
    phase_with_omega(omega, params.gamma(), p, 0)
}

pub(crate) fn phase_with_omega<T: Scalar>(omega: T, gamma: T, p: PhasePoint<T>, axis: usize) -> Result<T> {
    if p.is_origin() {
        return Err(Error::PhaseAtOrigin { axis });
    }
    Ok(principal((gamma * p.u + p.v).atan2(omega * p.u)))
}

/// Time derivative of the phase implied by the equation of motion at `p`.
///
/// On every solution this equals `−ω`.
pub fn phase_rate<T: Scalar>(params: AxisParams<T>, p: PhasePoint<T>) -> Result<T> {
    let omega = params.underdamped_omega(0, "phase rate")?;
    let g = params.gamma();
    let w0sq = params.omega0() * params.omega0();
    if p.is_origin() {
        return Err(Error::PhaseAtOrigin { axis: 0 });
    }
    let w = g * p.u + p.v;
    // d/dt atan2(w, ωu) with u̇ = v, ẇ = −ω0²u − γv
    let w_dot = -w0sq * p.u - g * p.v;
    let x = omega * p.u;
    Ok((x * w_dot - w * omega * p.v) / (x * x + w * w))
}

/// Checks `dt·ω < π/2` so sheet tracking along sampled data is unambiguous.
pub fn check_sampling<T: Scalar>(dt: T, omega: T) -> Result<()> {
    let product = dt * omega;
    if product < T::FRAC_PI_2() {
        Ok(())
    } else {
        Err(Error::SamplingTooCoarse {
            product: product.to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// Unwrapped phases along axis `k` of a trajectory, starting on `initial_sheet`.
pub fn track_phases<T: Scalar>(
    params: AxisParams<T>,
    traj: &Trajectory<T>,
    axis: usize,
    initial_sheet: i64,
) -> Result<Vec<UnwrappedPhase<T>>> {
    let omega = params.underdamped_omega(axis, "phase tracking")?;
    check_sampling(traj.dt(), omega)?;
    let mut out: Vec<UnwrappedPhase<T>> = Vec::with_capacity(traj.len());
    for s in traj.samples() {
        let raw = phase_with_omega(omega, params.gamma(), s.state.axis(axis), axis)?;
        let next = match out.last() {
            Some(prev) => prev.advance(raw)?,
            None => UnwrappedPhase::new(raw, initial_sheet),
        };
        out.push(next);
    }
    Ok(out)
}

/// Underdamped constant `log[ω²u² + w²] − 2(γ/ω)(φ − 2πn)`.
pub fn r_underdamped<T: Scalar>(params: AxisParams<T>, p: PhasePoint<T>, sheet: i64) -> Result<T> {
    let raw = phase_raw(params, p)?;
    r_underdamped_with_phase(params, p, UnwrappedPhase::new(raw, sheet))
}

/// [`r_underdamped`] with an already tracked phase.
pub fn r_underdamped_with_phase<T: Scalar>(
    params: AxisParams<T>,
    p: PhasePoint<T>,
    phase: UnwrappedPhase<T>,
) -> Result<T> {
    let omega = params.underdamped_omega(0, "r_underdamped")?;
    let g = params.gamma();
    if p.is_origin() {
        return Err(Error::PhaseAtOrigin { axis: 0 });
    }
    let w = g * p.u + p.v;
    let d = omega * omega * p.u * p.u + w * w;
    Ok(d.ln() - T::two() * (g / omega) * phase.unwrapped())
}

/// `r′ = e^r`; reduces to `ω0²u² + v²` (twice the energy) when `γ = 0`.
pub fn r_prime_underdamped<T: Scalar>(params: AxisParams<T>, p: PhasePoint<T>, sheet: i64) -> Result<T> {
    r_underdamped(params, p, sheet).map(T::exp)
}

/// `r` along a trajectory with automatic sheet tracking, starting on sheet 0.
pub fn r_underdamped_series<T: Scalar>(params: AxisParams<T>, traj: &Trajectory<T>, axis: usize) -> Result<Vec<T>> {
    let phases = track_phases(params, traj, axis, 0)?;
    traj.samples()
        .iter()
        .zip(phases)
        .map(|(s, ph)| r_underdamped_with_phase(params, s.state.axis(axis), ph))
        .collect()
}

/// The two natural-boundary line functions `ζu + w` and `ζu − w` of the overdamped case.
pub fn overdamped_lines<T: Scalar>(params: AxisParams<T>, p: PhasePoint<T>) -> Result<(T, T)> {
    let zeta = params.overdamped_zeta("overdamped lines")?;
    let w = params.gamma() * p.u + p.v;
    Ok((zeta * p.u + w, zeta * p.u - w))
}

fn on_line<T: Scalar>(value: T, scale: T) -> bool {
    value == T::zero() || value.abs() <= T::lit(4.0) * T::epsilon() * scale
}

/// Overdamped constant `−(ζ + γ) log|ζu + w| − (ζ − γ) log|ζu − w|`.
///
/// The additive constant `2ζ log 2ζ` is not included.
pub fn r_overdamped<T: Scalar>(params: AxisParams<T>, p: PhasePoint<T>) -> Result<T> {
    let zeta = params.overdamped_zeta("r_overdamped")?;
    let g = params.gamma();
    let (plus, minus) = overdamped_lines(params, p)?;
    let scale = (zeta * p.u).abs() + (g * p.u).abs() + p.v.abs();
    if on_line(plus, scale) {
        return Err(Error::OnNaturalBoundary {
            line: "zeta*u + (gamma*u + v) = 0",
        });
    }
    if on_line(minus, scale) {
        return Err(Error::OnNaturalBoundary {
            line: "zeta*u - (gamma*u + v) = 0",
        });
    }
    Ok(-(zeta + g) * plus.abs().ln() - (zeta - g) * minus.abs().ln())
}

/// Sign pattern of the diagonal coordinates `(ũ, ṽ)` of the overdamped case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Region {
    PlusPlus,
    PlusMinus,
    MinusPlus,
    MinusMinus,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Region::PlusPlus => "(+,+)",
            Region::PlusMinus => "(+,-)",
            Region::MinusPlus => "(-,+)",
            Region::MinusMinus => "(-,-)",
        })
    }
}

/// `ũ = [(γ+ζ)u + v]/(2ζ)`, `ṽ = [(ζ−γ)u − v]/(2ζ)`.
pub fn diagonal_coords<T: Scalar>(params: AxisParams<T>, p: PhasePoint<T>) -> Result<(T, T)> {
    let zeta = params.overdamped_zeta("diagonal coordinates")?;
    let (plus, minus) = overdamped_lines(params, p)?;
    let two_z = T::two() * zeta;
    Ok((plus / two_z, minus / two_z))
}

/// Inverse of [`diagonal_coords`].
pub fn from_diagonal_coords<T: Scalar>(params: AxisParams<T>, ut: T, vt: T) -> Result<PhasePoint<T>> {
    let zeta = params.overdamped_zeta("diagonal coordinates")?;
    let u = ut + vt;
    let w = zeta * (ut - vt);
    Ok(PhasePoint::new(u, w - params.gamma() * u))
}

pub fn region<T: Scalar>(params: AxisParams<T>, p: PhasePoint<T>) -> Result<Region> {
    let zeta = params.overdamped_zeta("region")?;
    let (ut, vt) = diagonal_coords(params, p)?;
    let scale = (zeta * p.u).abs() + (params.gamma() * p.u + p.v).abs();
    if on_line(ut, scale) || on_line(vt, scale) {
        return Err(Error::OnNaturalBoundary {
            line: "region boundary zeta*u ± (gamma*u + v) = 0",
        });
    }
    Ok(match (ut > T::zero(), vt > T::zero()) {
        (true, true) => Region::PlusPlus,
        (true, false) => Region::PlusMinus,
        (false, true) => Region::MinusPlus,
        (false, false) => Region::MinusMinus,
    })
}

/// Critically damped constant `log|w| + γu/w`.
pub fn r_critical<T: Scalar>(params: AxisParams<T>, p: PhasePoint<T>) -> Result<T> {
    params.require_critical("r_critical")?;
    let g = params.gamma();
    let w = g * p.u + p.v;
    if on_line(w, (g * p.u).abs() + p.v.abs()) {
        return Err(Error::OnNaturalBoundary {
            line: "gamma*u + v = 0",
        });
    }
    Ok(w.abs().ln() + g * p.u / w)
}

/// `ρ = 1/[(ω0² − γ²)u² + w²]`, valid in every regime.
pub fn integrating_factor<T: Scalar>(params: AxisParams<T>, p: PhasePoint<T>) -> Result<T> {
    let g = params.gamma();
    let w0 = params.omega0();
    let w = g * p.u + p.v;
    let d = (w0 - g) * (w0 + g) * p.u * p.u + w * w;
    if d == T::zero() || !d.is_finite() {
        return Err(Error::Singular("integrating factor denominator vanishes"));
    }
    Ok(T::one() / d)
}

/// Factor `k` such that `dr = k·ρ[(ω0²u + 2γv)du + v dv]` for the closed-form `r`
/// of the axis's regime: 2, −2ζ and 1 for under-, over- and critically damped.
pub fn r_normalization<T: Scalar>(params: AxisParams<T>) -> T {
    let f = params.derived_frequency();
    match f.regime {
        DampingRegime::Underdamped => T::two(),
        DampingRegime::Overdamped => -T::two() * f.value,
        DampingRegime::Critical => T::one(),
    }
}

/// Closed-form constant of the axis's regime (sheet 0 when underdamped).
pub fn r_closed_form<T: Scalar>(params: AxisParams<T>, p: PhasePoint<T>) -> Result<T> {
    match params.regime() {
        DampingRegime::Underdamped => r_underdamped(params, p, 0),
        DampingRegime::Overdamped => r_overdamped(params, p),
        DampingRegime::Critical => r_critical(params, p),
    }
}

/// Time-explicit constant `½[(ω0² − γ²)u² + w²]e^{2γt}`, valid in every regime.
pub fn r_alternative<T: Scalar>(params: AxisParams<T>, p: PhasePoint<T>, t: T) -> T {
    let g = params.gamma();
    let w0 = params.omega0();
    let w = g * p.u + p.v;
    T::half() * ((w0 - g) * (w0 + g) * p.u * p.u + w * w) * (T::two() * g * t).exp()
}

/// Energy `½(ω0²u² + v²)` of one axis.
pub fn energy<T: Scalar>(params: AxisParams<T>, p: PhasePoint<T>) -> T {
    let w0 = params.omega0();
    T::half() * (w0 * w0 * p.u * p.u + p.v * p.v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillator::{ExactSolution, OscParams};
    use crate::trajectory::sample_exact;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn ap(w0: f64, g: f64) -> AxisParams<f64> {
        AxisParams::new(w0, g).unwrap()
    }

    fn spread(xs: &[f64]) -> f64 {
        let max = xs.iter().cloned().fold(f64::MIN, f64::max);
        let min = xs.iter().cloned().fold(f64::MAX, f64::min);
        max - min
    }

    #[test]
    fn phase_examples() {
        assert_eq!(phase_raw(ap(1.0, 0.0), PhasePoint::new(1.0, 0.0)).unwrap(), 0.0);
        assert!((phase_raw(ap(1.0, 0.0), PhasePoint::new(0.0, 1.0)).unwrap() - PI / 2.0).abs() < 1e-15);
        // independent evaluation: atan2(0.15 − 2.5827, √0.99·1.5)
        let expected = (0.15f64 - 2.5827).atan2(0.99f64.sqrt() * 1.5);
        let got = phase_raw(ap(1.0, 0.1), PhasePoint::new(1.5, -2.5827)).unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert!((got + 1.0205035618458815).abs() < 1e-12);
        assert!(matches!(
            phase_raw(ap(1.0, 0.1), PhasePoint::new(0.0, 0.0)),
            Err(Error::PhaseAtOrigin { .. })
        ));
        assert!(matches!(
            phase_raw(ap(1.0, 1.1), PhasePoint::new(1.0, 0.0)),
            Err(Error::RegimeMismatch { .. })
        ));
        // negative zero on the cut still lands at +π
        assert_eq!(phase_raw(ap(1.0, 0.0), PhasePoint::new(-1.0, -0.0)).unwrap(), PI);
    }

    #[test]
    fn unwrap_examples() {
        let next = unwrap(UnwrappedPhase::new(-3.0, 0), 3.0).unwrap();
        assert_eq!(next.sheet, 1);
        assert!((next.unwrapped() - (3.0 - 2.0 * PI)).abs() < 1e-15);
        assert!((next.unwrapped() + 3.283185307179586).abs() < 1e-12);
        assert_eq!(unwrap(UnwrappedPhase::new(0.1, 0), -0.1).unwrap().sheet, 0);
        assert_eq!(unwrap(UnwrappedPhase::new(3.0, 2), -3.0).unwrap().sheet, 1);
        assert!(matches!(
            unwrap(UnwrappedPhase::new(0.0, 0), 3.5f64.min(PI)),
            Err(Error::AmbiguousPhaseJump { .. })
        ));
        assert!(matches!(
            unwrap(UnwrappedPhase::new(-2.0, 0), 2.0),
            Err(Error::AmbiguousPhaseJump { .. })
        ));
    }

    #[test]
    fn on_shell_phase_is_linear_in_time() {
        let p = OscParams::<f64>::one_d(1.0, 0.1).unwrap();
        let sol = ExactSolution::from_initial(&p, &[1.5], &[-2.5827]).unwrap();
        let (_, beta) = sol.amplitude_phase(0).unwrap();
        let omega = p.derived_frequency(0).value;
        let period = 2.0 * PI / omega;
        let n = 1000;
        let dt = 10.0 * period / n as f64;
        let tr = sample_exact(&p, &[1.5], &[-2.5827], dt, n).unwrap();
        let phases = track_phases(p.axis(0), &tr, 0, 0).unwrap();
        for (s, ph) in tr.samples().iter().zip(&phases) {
            assert!((ph.unwrapped() - (beta - omega * s.t)).abs() < 1e-10);
        }
        assert!(phases.last().unwrap().sheet >= 9);
    }

    #[test]
    fn coarse_sampling_rejected() {
        let p = OscParams::<f64>::one_d(1.0, 0.0).unwrap();
        let tr = sample_exact(&p, &[1.0], &[0.0], 1.6, 10).unwrap();
        assert!(matches!(
            track_phases(p.axis(0), &tr, 0, 0),
            Err(Error::SamplingTooCoarse { .. })
        ));
    }

    #[test]
    fn phase_rate_is_minus_omega_on_shell() {
        let a = ap(1.3, 0.2);
        let omega = a.derived_frequency().value;
        for &(u, v) in &[(1.0, 0.0), (-0.3, 2.0), (0.5, -0.5)] {
            assert!((phase_rate(a, PhasePoint::new(u, v)).unwrap() + omega).abs() < 1e-14);
        }
    }

    #[test]
    fn r_underdamped_reference_point() {
        let a = ap(1.0, 0.1);
        let p = PhasePoint::new(1.5, -2.5827);
        // oracle: term-by-term evaluation
        let omega = 0.99f64.sqrt();
        let w = 0.1 * 1.5 - 2.5827;
        let d = omega * omega * 2.25 + w * w;
        let oracle = d.ln() - 2.0 * (0.1 / omega) * w.atan2(omega * 1.5);
        let r = r_underdamped(a, p, 0).unwrap();
        assert!((r - oracle).abs() < 1e-14);
        assert!((r - 2.3025981574204573).abs() < 1e-12);
        let rp = r_prime_underdamped(a, p, 0).unwrap();
        assert!((rp - 10.0).abs() < 0.01 * 10.0);
        // next sheet shifts by 4πγ/ω
        let r1 = r_underdamped(a, p, 1).unwrap();
        assert!((r1 - r - 4.0 * PI * 0.1 / omega).abs() < 1e-12);
    }

    #[test]
    fn undamped_r_prime_is_twice_energy() {
        let a = ap(1.0, 0.0);
        let p = PhasePoint::new(1.0, 0.0);
        let rp = r_prime_underdamped(a, p, 0).unwrap();
        assert!((rp - 1.0).abs() < 1e-15);
        assert!((energy(a, p) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn r_underdamped_constant_along_trajectory() {
        let p = OscParams::<f64>::one_d(1.0, 0.1).unwrap();
        let tr = sample_exact(&p, &[1.5], &[-2.5827], 0.3, 60).unwrap();
        let rs = r_underdamped_series(p.axis(0), &tr, 0).unwrap();
        assert!(spread(&rs) < 1e-10, "spread {}", spread(&rs));
    }

    #[test]
    fn r_overdamped_examples() {
        let a = ap(1.0, 1.1);
        let p = PhasePoint::new(-1.75, -3.99);
        let zeta = 0.21f64.sqrt();
        let w = 1.1 * -1.75 - 3.99;
        let oracle = -(zeta + 1.1) * (zeta * -1.75 + w).abs().ln() - (zeta - 1.1) * (zeta * -1.75 - w).abs().ln();
        let r = r_overdamped(a, p).unwrap();
        assert!((r - oracle).abs() < 1e-14);
        assert!((r + 1.9207181067284473).abs() < 1e-12);

        // u = 1 on the line ζu + w = 0 ⇒ v = −(ζ + γ)
        let on = PhasePoint::new(1.0, -(zeta + 1.1));
        assert!(matches!(r_overdamped(a, on), Err(Error::OnNaturalBoundary { line }) if line.starts_with("zeta*u +")));
        let on = PhasePoint::new(1.0, zeta - 1.1);
        assert!(matches!(r_overdamped(a, on), Err(Error::OnNaturalBoundary { line }) if line.starts_with("zeta*u -")));
    }

    #[test]
    fn r_overdamped_constant_along_trajectory() {
        let p = OscParams::<f64>::one_d(1.0, 1.1).unwrap();
        let tr = sample_exact(&p, &[-1.75], &[-3.99], 0.2, 40).unwrap();
        let rs: Vec<f64> = tr
            .states()
            .map(|s| r_overdamped(p.axis(0), s.axis(0)).unwrap())
            .collect();
        assert!(spread(&rs) < 1e-10, "spread {}", spread(&rs));
    }

    #[test]
    fn regions() {
        let a = ap(1.0, 1.1);
        let corners = [
            ((1.0, 1.0), Region::PlusPlus),
            ((1.0, -1.0), Region::PlusMinus),
            ((-1.0, 1.0), Region::MinusPlus),
            ((-1.0, -1.0), Region::MinusMinus),
        ];
        for ((ut, vt), expected) in corners {
            let p = from_diagonal_coords(a, ut, vt).unwrap();
            assert_eq!(region(a, p).unwrap(), expected);
            let (bu, bv) = diagonal_coords(a, p).unwrap();
            assert!((bu - ut).abs() < 1e-14 && (bv - vt).abs() < 1e-14);
        }
        assert!(region(a, PhasePoint::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn r_critical_examples() {
        let a = ap(1.0, 1.0);
        let r = r_critical(a, PhasePoint::new(-1.58, -3.99)).unwrap();
        // oracle: log|B| + γA/B with A = −1.58, B = −5.57
        let oracle = 5.57f64.ln() + (-1.58) / (-5.57);
        assert!((r - oracle).abs() < 1e-14);
        assert!((r - 2.00106).abs() < 1e-5);
        assert!(matches!(
            r_critical(a, PhasePoint::new(1.0, -1.0)),
            Err(Error::OnNaturalBoundary { .. })
        ));

        let p = OscParams::<f64>::one_d(1.0, 1.0).unwrap();
        let tr = sample_exact(&p, &[-1.58], &[-3.99], 0.2, 40).unwrap();
        for s in tr.states() {
            assert!((r_critical(a, s.axis(0)).unwrap() - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn integrating_factor_examples() {
        assert_eq!(
            integrating_factor(ap(1.0, 0.0), PhasePoint::new(1.0, 0.0)).unwrap(),
            1.0
        );
        let rho = integrating_factor(ap(1.0, 0.1), PhasePoint::new(1.5, -2.5827)).unwrap();
        assert!((rho - 1.0 / 8.14552929).abs() < 1e-12);
        assert!(integrating_factor(ap(1.0, 0.1), PhasePoint::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn alternative_constant() {
        let a = ap(1.3, 0.0);
        let p = PhasePoint::new(0.4, -0.9);
        assert!((r_alternative(a, p, 5.0) - energy(a, p)).abs() < 1e-15);

        let sets = [
            (1.0, 0.1, 1.5, -2.5827),
            (1.0, 1.1, -1.75, -3.99),
            (1.0, 1.0, -1.58, -3.99),
        ];
        for (w0, g, u0, v0) in sets {
            let p = OscParams::<f64>::one_d(w0, g).unwrap();
            let tr = sample_exact(&p, &[u0], &[v0], 0.01, 1000).unwrap();
            let vals: Vec<f64> = tr
                .samples()
                .iter()
                .map(|s| r_alternative(p.axis(0), s.state.axis(0), s.t))
                .collect();
            assert!(
                spread(&vals) < 1e-10 * vals[0].abs(),
                "regime {g}: {}",
                spread(&vals) / vals[0].abs()
            );
        }

        // critical: 2r′ = B²
        let p = OscParams::<f64>::one_d(1.0, 1.0).unwrap();
        let tr = sample_exact(&p, &[-1.58], &[-3.99], 0.2, 40).unwrap();
        for s in tr.samples() {
            assert!((2.0 * r_alternative(p.axis(0), s.state.axis(0), s.t) - 5.57 * 5.57).abs() < 1e-10);
        }
    }

    #[test]
    fn underdamped_and_alternative_agree_up_to_phase_term() {
        let p = OscParams::<f64>::one_d(1.0, 0.1).unwrap();
        let sol = ExactSolution::from_initial(&p, &[1.5], &[-2.5827]).unwrap();
        let (_, beta) = sol.amplitude_phase(0).unwrap();
        let omega = p.derived_frequency(0).value;
        let tr = sample_exact(&p, &[1.5], &[-2.5827], 0.1, 500).unwrap();
        let rs = r_underdamped_series(p.axis(0), &tr, 0).unwrap();
        for (s, r) in tr.samples().iter().zip(rs) {
            let alt = (2.0 * r_alternative(p.axis(0), s.state.axis(0), s.t)).ln();
            assert!((r - alt + 2.0 * 0.1 / omega * beta).abs() < 1e-10);
        }
    }

    #[test]
    fn gamma_limit_recovers_energy() {
        let small = ap(1.0, 1e-8);
        let zero = ap(1.0, 0.0);
        for &(u, v) in &[(1.0, 0.3), (-0.7, 1.2), (0.2, -2.0)] {
            let p = PhasePoint::new(u, v);
            let a = r_prime_underdamped(small, p, 0).unwrap() / 2.0;
            let b = energy(zero, p);
            assert!((a - b).abs() < 1e-6 * b);
        }
    }

    proptest! {
        #[test]
        fn tracked_phase_is_continuous(g in 0.0f64..0.9, u0 in -2.0f64..2.0, v0 in -2.0f64..2.0) {
            prop_assume!(u0.abs() + v0.abs() > 1e-3);
            let p = OscParams::<f64>::one_d(1.0, g).unwrap();
            let tr = sample_exact(&p, &[u0], &[v0], 0.2, 300).unwrap();
            let ph = track_phases(p.axis(0), &tr, 0, 0).unwrap();
            for w in ph.windows(2) {
                prop_assert!((w[1].unwrapped() - w[0].unwrapped()).abs() < PI);
                prop_assert!(w[1].raw > -PI && w[1].raw <= PI);
            }
        }
    }
}
