//! Constants of motion coupling different axes of the 2D and N-D oscillator.
//!
//! All constants here are built from per-axis quantities: the damped
//! frequency `ω_k`, the tracked phase `φ_k − 2πn_k` and the pseudo-energy
//! `Ẽ_k = ½[(ω_k u_k)² + (γu_k + v_k)²]`.
//!
//! Polynomial forms for damped data use `w_k = γu_k + v_k` wherever the
//! undamped forms use `v_k`; the two agree at `γ = 0`.

use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::invariants_1d::{check_sampling, phase_rate, phase_with_omega, UnwrappedPhase};
use crate::oscillator::{DampingRegime, OscParams, State};
use crate::scalar::{approx_eq_rel, Scalar};
use crate::trajectory::Trajectory;

/// Relative tolerance used to validate frequency relations supplied by callers.
pub const FREQUENCY_MATCH_TOLERANCE: f64 = 1e-9;

/// Per-axis frequencies, phases and pseudo-energies at one state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeQuantities<T> {
    pub gamma: T,
    pub omega0: Vec<T>,
    pub omega: Vec<T>,
    pub phases: Vec<UnwrappedPhase<T>>,
    pub pseudo_energy: Vec<T>,
    pub state: State<T>,
}

impl<T: Scalar> ModeQuantities<T> {
    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    /// `φ_k − 2πn_k`.
    pub fn unwrapped_phase(&self, k: usize) -> T {
        self.phases[k].unwrapped()
    }

    pub fn unwrapped_phases(&self) -> Vec<T> {
        self.phases.iter().map(UnwrappedPhase::unwrapped).collect()
    }

    /// `w_k = γu_k + v_k`.
    pub fn w(&self, k: usize) -> T {
        self.gamma * self.state.u[k] + self.state.v[k]
    }

    fn require_dim(&self, n: usize) -> Result<()> {
        if self.dim() == n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: n,
                got: self.dim(),
            })
        }
    }

    fn require_undamped(&self, operation: &'static str) -> Result<()> {
        if self.gamma == T::zero() {
            Ok(())
        } else {
            Err(Error::RegimeMismatch {
                axis: 0,
                operation,
                required: "undamped (gamma = 0)",
                found: format!("gamma = {}", self.gamma),
            })
        }
    }

    fn positive_energy(&self, k: usize) -> Result<T> {
        let e = self.pseudo_energy[k];
        if e > T::zero() {
            Ok(e)
        } else {
            Err(Error::ZeroEnergy { axis: k })
        }
    }
}

/// Damped frequencies of every axis, rejecting anything that is not underdamped.
pub fn mode_frequencies<T: Scalar>(params: &OscParams<T>) -> Result<Vec<T>> {
    let regimes: Vec<DampingRegime> = (0..params.dim()).map(|k| params.classify_regime(k)).collect();
    if regimes.iter().all(|r| *r == DampingRegime::Underdamped) {
        return Ok((0..params.dim()).map(|k| params.derived_frequency(k).value).collect());
    }
    let listing = regimes
        .iter()
        .enumerate()
        .map(|(k, r)| format!("axis {k}: {r}"))
        .collect::<Vec<_>>()
        .join(", ");
    if regimes.contains(&DampingRegime::Underdamped) {
        Err(Error::MixedRegimes(listing))
    } else {
        Err(Error::RegimeMismatch {
            axis: 0,
            operation: "mode quantities",
            required: "underdamped on every axis",
            found: listing,
        })
    }
}

/// Mode quantities at `state`, unwrapping phases against `prev` when given
/// (sheet 0 otherwise).
pub fn mode_quantities<T: Scalar>(
    params: &OscParams<T>,
    state: &State<T>,
    prev: Option<&[UnwrappedPhase<T>]>,
) -> Result<ModeQuantities<T>> {
    params.check_dim(state.dim())?;
    if let Some(p) = prev {
        params.check_dim(p.len())?;
    }
    let omega = mode_frequencies(params)?;
    let g = params.gamma();
    let mut phases = Vec::with_capacity(omega.len());
    let mut pseudo_energy = Vec::with_capacity(omega.len());
    for (k, (&om, pt)) in omega.iter().zip(state.axes()).enumerate() {
        let raw = phase_with_omega(om, g, pt, k)?;
        let ph = match prev {
            Some(p) => p[k].advance(raw)?,
            None => UnwrappedPhase::start(raw),
        };
        phases.push(ph);
        let w = g * pt.u + pt.v;
        pseudo_energy.push(T::half() * ((om * pt.u) * (om * pt.u) + w * w));
    }
    Ok(ModeQuantities {
        gamma: g,
        omega0: params.omega0().to_vec(),
        omega,
        phases,
        pseudo_energy,
        state: state.clone(),
    })
}

/// Mode quantities for every sample with per-axis sheet tracking.
pub fn track_modes<T: Scalar>(params: &OscParams<T>, traj: &Trajectory<T>) -> Result<Vec<ModeQuantities<T>>> {
    let omega = mode_frequencies(params)?;
    let fastest = omega.iter().copied().fold(T::zero(), T::max);
    check_sampling(traj.dt(), fastest)?;
    let mut out: Vec<ModeQuantities<T>> = Vec::with_capacity(traj.len());
    for s in traj.samples() {
        let prev = out.last().map(|m| m.phases.as_slice());
        out.push(mode_quantities(params, &s.state, prev)?);
    }
    Ok(out)
}

/// `C_R = ω10φ2 − ω20φ1 − 2π(n2ω10 − n1ω20)` for the undamped 2D oscillator.
pub fn c_r_undamped<T: Scalar>(modes: &ModeQuantities<T>) -> Result<T> {
    modes.require_undamped("C_R")?;
    modes.require_dim(2)?;
    Ok(pair_constant(modes, 0, 1))
}

/// `C_I = −ω20 log√(2E1) − ω10 log√(2E2)`.
pub fn c_i_undamped<T: Scalar>(modes: &ModeQuantities<T>) -> Result<T> {
    modes.require_undamped("C_I")?;
    modes.require_dim(2)?;
    let e1 = modes.positive_energy(0)?;
    let e2 = modes.positive_energy(1)?;
    let (w1, w2) = (modes.omega[0], modes.omega[1]);
    Ok(-w2 * (T::two() * e1).sqrt().ln() - w1 * (T::two() * e2).sqrt().ln())
}

/// `C_A = γ log(Ẽ2/Ẽ1)`.
pub fn c_a_damped<T: Scalar>(modes: &ModeQuantities<T>) -> Result<T> {
    modes.require_dim(2)?;
    let e1 = modes.positive_energy(0)?;
    let e2 = modes.positive_energy(1)?;
    Ok(modes.gamma * (e2 / e1).ln())
}

/// `C_B = ω1φ2 − ω2φ1 − 2π(n2ω1 − n1ω2)`; equals `C_R` at `γ = 0`.
pub fn c_b_damped<T: Scalar>(modes: &ModeQuantities<T>) -> Result<T> {
    modes.require_dim(2)?;
    Ok(pair_constant(modes, 0, 1))
}

fn pair_constant<T: Scalar>(modes: &ModeQuantities<T>, i: usize, j: usize) -> T {
    modes.omega[i] * modes.unwrapped_phase(j) - modes.omega[j] * modes.unwrapped_phase(i)
}

/// Sine and cosine of `C/ω` for the isotropic oscillator, evaluated both from
/// the tracked phases and from state polynomials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsoProjections<T> {
    pub constant: T,
    pub phase_sin: T,
    pub phase_cos: T,
    /// `ω(u1v2 − u2v1) / (2√(Ẽ1Ẽ2))`
    pub poly_sin: T,
    /// `(ω²u1u2 + w1w2) / (2√(Ẽ1Ẽ2))`
    pub poly_cos: T,
}

impl<T: Scalar> IsoProjections<T> {
    /// Largest disagreement between the two routes.
    pub fn route_gap(&self) -> T {
        (self.phase_sin - self.poly_sin)
            .abs()
            .max((self.phase_cos - self.poly_cos).abs())
    }
}

pub fn iso_projections<T: Scalar>(modes: &ModeQuantities<T>) -> Result<IsoProjections<T>> {
    modes.require_dim(2)?;
    let omega = modes.omega[0];
    if !approx_eq_rel(omega, modes.omega[1], T::lit(FREQUENCY_MATCH_TOLERANCE)) {
        return Err(Error::InvalidParams(format!(
            "isotropic projections need omega_1 = omega_2, got {} and {}",
            modes.omega[0], modes.omega[1]
        )));
    }
    let e1 = modes.positive_energy(0)?;
    let e2 = modes.positive_energy(1)?;
    let c = pair_constant(modes, 0, 1);
    let (s, co) = (c / omega).sin_cos();
    let st = &modes.state;
    let denom = T::two() * (e1 * e2).sqrt();
    let l = st.u[0] * st.v[1] - st.u[1] * st.v[0];
    Ok(IsoProjections {
        constant: c,
        phase_sin: s,
        phase_cos: co,
        poly_sin: omega * l / denom,
        poly_cos: (omega * omega * st.u[0] * st.u[1] + modes.w(0) * modes.w(1)) / denom,
    })
}

/// Both sides of `4Ẽ1Ẽ2 = ω²(u1v2 − u2v1)² + (ω²u1u2 + w1w2)²` for an isotropic pair.
pub fn pseudo_energy_identity<T: Scalar>(modes: &ModeQuantities<T>) -> Result<(T, T)> {
    modes.require_dim(2)?;
    let omega = modes.omega[0];
    let st = &modes.state;
    let l = st.u[0] * st.v[1] - st.u[1] * st.v[0];
    let c = omega * omega * st.u[0] * st.u[1] + modes.w(0) * modes.w(1);
    let lhs = T::lit(4.0) * modes.pseudo_energy[0] * modes.pseudo_energy[1];
    Ok((lhs, omega * omega * l * l + c * c))
}

/// Phase-route and (where available) polynomial-route values of `sin(C/ω̄)`
/// for commensurate frequencies `ω1 = ω̄a`, `ω2 = ω̄b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommensurateValue<T> {
    /// `aφ2 − bφ1 − 2π(an2 − bn1)`
    pub angle: T,
    pub phase_route: T,
    /// Only for `(a, b) = (1, 2)`.
    pub polynomial_route: Option<T>,
}

pub fn commensurate_invariant<T: Scalar>(
    modes: &ModeQuantities<T>,
    a: u32,
    b: u32,
    omega_bar: T,
) -> Result<CommensurateValue<T>> {
    modes.require_dim(2)?;
    if a == 0 || b == 0 || a.gcd(&b) != 1 {
        return Err(Error::NotCoprime { a, b });
    }
    let tol = T::lit(FREQUENCY_MATCH_TOLERANCE);
    let (fa, fb) = (T::lit(f64::from(a)), T::lit(f64::from(b)));
    if !(omega_bar > T::zero()
        && approx_eq_rel(modes.omega[0], omega_bar * fa, tol)
        && approx_eq_rel(modes.omega[1], omega_bar * fb, tol))
    {
        return Err(Error::NotCommensurate {
            a,
            b,
            omega_bar: omega_bar.to_f64().unwrap_or(f64::NAN),
        });
    }
    let angle = fa * modes.unwrapped_phase(1) - fb * modes.unwrapped_phase(0);
    let polynomial_route = if (a, b) == (1, 2) {
        let e1 = modes.positive_energy(0)?;
        let e2 = modes.positive_energy(1)?;
        let st = &modes.state;
        let (u1, u2) = (st.u[0], st.u[1]);
        let (w1, w2) = (modes.w(0), modes.w(1));
        let wb2 = omega_bar * omega_bar;
        let num = wb2 * u1 * u1 * w2 - w1 * w1 * w2 - T::lit(4.0) * wb2 * u1 * u2 * w1;
        Some(num / (T::lit(8.0) * e1 * e1 * e2).sqrt())
    } else {
        None
    };
    Ok(CommensurateValue {
        angle,
        phase_route: angle.sin(),
        polynomial_route,
    })
}

/// `C′ = (2/ω10)√(E1E2) sin Φ` with `Φ = (ω10φ2 − ω20φ1)/ω10`; equals
/// `u1v2 − u2v1` in the isotropic case.
pub fn generalized_angular_momentum<T: Scalar>(modes: &ModeQuantities<T>) -> Result<T> {
    modes.require_undamped("generalized angular momentum")?;
    modes.require_dim(2)?;
    let e1 = modes.positive_energy(0)?;
    let e2 = modes.positive_energy(1)?;
    let w10 = modes.omega[0];
    let big_phi = pair_constant(modes, 0, 1) / w10;
    Ok(T::two() / w10 * (e1 * e2).sqrt() * big_phi.sin())
}

/// Plain angular momentum `u1v2 − u2v1`.
pub fn angular_momentum<T: Scalar>(state: &State<T>) -> T {
    state.u[0] * state.v[1] - state.u[1] * state.v[0]
}

/// Antisymmetric table `C(i, j) = ω_iφ_j − ω_jφ_i` over all axis pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WedgeConstants<T> {
    n: usize,
    entries: Vec<T>,
}

impl<T: Scalar> WedgeConstants<T> {
    /// Exterior product `a ∧ b`, entry `(i, j) = a_i b_j − a_j b_i`.
    pub fn exterior(a: &[T], b: &[T]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                got: b.len(),
            });
        }
        let n = a.len();
        let mut entries = vec![T::zero(); n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let c = a[i] * b[j] - a[j] * b[i];
                entries[i * n + j] = c;
                entries[j * n + i] = -c;
            }
        }
        Ok(Self { n, entries })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.n + j]
    }

    /// The `N(N−1)/2` entries above the diagonal as `(i, j, C(i, j))`.
    pub fn independent(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.n).flat_map(move |i| ((i + 1)..self.n).map(move |j| (i, j, self.get(i, j))))
    }
}

/// `C = ω ∧ φ` from tracked phases.
pub fn wedge_constants<T: Scalar>(modes: &ModeQuantities<T>) -> Result<WedgeConstants<T>> {
    WedgeConstants::exterior(&modes.omega, &modes.unwrapped_phases())
}

/// `C = φ ∧ φ̇`, with `φ̇_k` evaluated from the equation of motion at the current state.
pub fn wedge_constants_on_shell<T: Scalar>(
    params: &OscParams<T>,
    modes: &ModeQuantities<T>,
) -> Result<WedgeConstants<T>> {
    params.check_dim(modes.dim())?;
    let rates = params
        .axes()
        .zip(modes.state.axes())
        .map(|(ap, pt)| phase_rate(ap, pt))
        .collect::<Result<Vec<T>>>()?;
    WedgeConstants::exterior(&modes.unwrapped_phases(), &rates)
}
