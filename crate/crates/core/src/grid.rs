//! Evaluation of 1D constants of motion on a rectangular `(u, v)` grid, for
//! contour and heatmap plots.
//!
//! Unlike the functions in [`crate::invariants_1d`], grid evaluation clamps the
//! singular factors instead of failing: `|ζu ± w|` in the overdamped regime and
//! `|w|` (sign kept) in the critical regime.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants_1d::r_underdamped;
use crate::oscillator::{AxisParams, DampingRegime, PhasePoint};
use crate::scalar::Scalar;

pub const DEFAULT_OVERDAMPED_CLAMP: f64 = 0.001;
pub const DEFAULT_CRITICAL_CLAMP: f64 = 0.01;
pub const DEFAULT_HALF_WIDTH: f64 = 5.0;
pub const DEFAULT_RESOLUTION: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    #[default]
    Identity,
    /// `e^r`, e.g. `r′` for the underdamped constant.
    Exp,
}

impl std::str::FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Self::Identity),
            "exp" => Ok(Self::Exp),
            other => Err(Error::InvalidParams(format!(
                "unknown transform '{other}' (expected identity or exp)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T> {
    pub u_min: T,
    pub u_max: T,
    pub v_min: T,
    pub v_max: T,
    pub nu: usize,
    pub nv: usize,
    /// Minimum magnitude of the singular factors; regime default when `None`.
    pub clamp_threshold: Option<T>,
    /// Riemann sheet, underdamped only; 0 when `None`.
    pub sheet: Option<i64>,
    pub transform: Transform,
}

impl<T: Scalar> Default for GridSpec<T> {
    fn default() -> Self {
        let h = T::lit(DEFAULT_HALF_WIDTH);
        Self {
            u_min: -h,
            u_max: h,
            v_min: -h,
            v_max: h,
            nu: DEFAULT_RESOLUTION,
            nv: DEFAULT_RESOLUTION,
            clamp_threshold: None,
            sheet: None,
            transform: Transform::Identity,
        }
    }
}

impl<T: Scalar> GridSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.nu < 2 || self.nv < 2 {
            return Err(Error::InvalidParams(format!(
                "grid resolution must be at least 2x2, got {}x{}",
                self.nu, self.nv
            )));
        }
        let finite = [self.u_min, self.u_max, self.v_min, self.v_max]
            .iter()
            .all(|x| x.is_finite());
        if !finite || !(self.u_min < self.u_max) || !(self.v_min < self.v_max) {
            return Err(Error::InvalidParams(format!(
                "grid window must satisfy min < max, got u [{}, {}], v [{}, {}]",
                self.u_min, self.u_max, self.v_min, self.v_max
            )));
        }
        if let Some(c) = self.clamp_threshold {
            if !(c > T::zero()) || !c.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "clamp threshold must be positive, got {c}"
                )));
            }
        }
        Ok(())
    }

    pub fn du(&self) -> T {
        (self.u_max - self.u_min) / T::from_count(self.nu - 1)
    }

    pub fn dv(&self) -> T {
        (self.v_max - self.v_min) / T::from_count(self.nv - 1)
    }

    pub fn u_at(&self, i: usize) -> T {
        self.u_min + T::from_count(i) * self.du()
    }

    pub fn v_at(&self, j: usize) -> T {
        self.v_min + T::from_count(j) * self.dv()
    }
}

/// Grid values in row-major order with `v` as the outer index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid<T> {
    pub spec: GridSpec<T>,
    pub values: Vec<T>,
}

impl<T: Scalar> Grid<T> {
    pub fn value(&self, i: usize, j: usize) -> T {
        self.values[j * self.spec.nu + i]
    }

    /// Bilinear interpolation; `None` outside the window.
    pub fn interpolate(&self, u: T, v: T) -> Option<T> {
        let s = &self.spec;
        if !(u >= s.u_min && u <= s.u_max && v >= s.v_min && v <= s.v_max) {
            return None;
        }
        let x = (u - s.u_min) / s.du();
        let y = (v - s.v_min) / s.dv();
        let i = x.floor().to_usize()?.min(s.nu - 2);
        let j = y.floor().to_usize()?.min(s.nv - 2);
        let fx = x - T::from_count(i);
        let fy = y - T::from_count(j);
        let one = T::one();
        Some(
            (one - fx) * (one - fy) * self.value(i, j)
                + fx * (one - fy) * self.value(i + 1, j)
                + (one - fx) * fy * self.value(i, j + 1)
                + fx * fy * self.value(i + 1, j + 1),
        )
    }

    /// Long-format CSV with header `u,v,value`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 48 + 12);
        out.push_str("u,v,value\n");
        for j in 0..self.spec.nv {
            let v = self.spec.v_at(j);
            for i in 0..self.spec.nu {
                writeln!(out, "{},{},{}", self.spec.u_at(i), v, self.value(i, j)).expect("writing to String");
            }
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(self.to_csv_string().as_bytes())?;
        f.flush()?;
        Ok(())
    }
}

/// Closed-form constant of the axis's regime with singular factors clamped.
///
/// Returns NaN at the origin of the underdamped plane, where `r` is undefined.
pub fn clamped_value<T: Scalar>(params: AxisParams<T>, p: PhasePoint<T>, spec: &GridSpec<T>) -> T {
    let g = params.gamma();
    let w = g * p.u + p.v;
    let r = match params.regime() {
        DampingRegime::Underdamped => r_underdamped(params, p, spec.sheet.unwrap_or(0)).unwrap_or_else(|_| T::nan()),
        DampingRegime::Overdamped => {
            let zeta = params.derived_frequency().value;
            let c = spec.clamp_threshold.unwrap_or_else(|| T::lit(DEFAULT_OVERDAMPED_CLAMP));
            let plus = (zeta * p.u + w).abs().max(c);
            let minus = (zeta * p.u - w).abs().max(c);
            -(zeta + g) * plus.ln() - (zeta - g) * minus.ln()
        }
        DampingRegime::Critical => {
            let c = spec.clamp_threshold.unwrap_or_else(|| T::lit(DEFAULT_CRITICAL_CLAMP));
            let wc = if w < T::zero() { -(w.abs().max(c)) } else { w.max(c) };
            wc.abs().ln() + g * p.u / wc
        }
    };
    match spec.transform {
        Transform::Identity => r,
        Transform::Exp => r.exp(),
    }
}

/// Evaluates the regime's constant over the grid.
pub fn evaluate_grid<T: Scalar>(params: AxisParams<T>, spec: &GridSpec<T>) -> Result<Grid<T>> {
    spec.validate()?;
    if spec.sheet.is_some() && params.regime() != DampingRegime::Underdamped {
        return Err(Error::InvalidParams(format!(
            "sheet selection applies to underdamped parameters only, found {}",
            params.regime()
        )));
    }
    let mut values = Vec::with_capacity(spec.nu * spec.nv);
    for j in 0..spec.nv {
        let v = spec.v_at(j);
        for i in 0..spec.nu {
            values.push(clamped_value(params, PhasePoint::new(spec.u_at(i), v), spec));
        }
    }
    Ok(Grid {
        spec: spec.clone(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants_1d::{r_critical, r_overdamped};
    use crate::oscillator::OscParams;

    fn small(nu: usize, nv: usize) -> GridSpec<f64> {
        GridSpec {
            nu,
            nv,
            ..GridSpec::default()
        }
    }

    #[test]
    fn validation() {
        assert!(small(1, 10).validate().is_err());
        assert!(GridSpec {
            u_min: 1.0,
            u_max: 1.0,
            ..small(5, 5)
        }
        .validate()
        .is_err());
        assert!(GridSpec {
            clamp_threshold: Some(0.0),
            ..small(5, 5)
        }
        .validate()
        .is_err());
        assert!(small(2, 2).validate().is_ok());
        let ap = OscParams::<f64>::one_d(1.0, 1.1).unwrap().axis(0);
        assert!(evaluate_grid(
            ap,
            &GridSpec {
                sheet: Some(1),
                ..small(3, 3)
            }
        )
        .is_err());
    }

    #[test]
    fn ordering_and_csv() {
        let ap = OscParams::<f64>::one_d(1.0, 1.0).unwrap().axis(0);
        let spec = GridSpec {
            u_min: 0.0,
            u_max: 1.0,
            v_min: 2.0,
            v_max: 4.0,
            ..small(2, 3)
        };
        let g = evaluate_grid(ap, &spec).unwrap();
        let csv = g.to_csv_string();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "u,v,value");
        assert_eq!(lines.len(), 7);
        assert!(lines[1].starts_with("0,2,"));
        assert!(lines[2].starts_with("1,2,"));
        assert!(lines[3].starts_with("0,3,"));
        assert!(csv.ends_with('\n') && !csv.contains('\r'));
    }

    #[test]
    fn unclamped_cells_match_closed_form() {
        let over = OscParams::<f64>::one_d(1.0, 1.1).unwrap().axis(0);
        let crit = OscParams::<f64>::one_d(1.0, 1.0).unwrap().axis(0);
        let p = PhasePoint::new(-1.75, -3.99);
        assert_eq!(clamped_value(over, p, &small(2, 2)), r_overdamped(over, p).unwrap());
        assert_eq!(clamped_value(crit, p, &small(2, 2)), r_critical(crit, p).unwrap());
    }

    #[test]
    fn clamping_bounds_critical_values() {
        let ap = OscParams::<f64>::one_d(1.0, 1.0).unwrap().axis(0);
        let g = evaluate_grid(ap, &small(101, 101)).unwrap();
        // |γu/w| ≤ 5/0.01 and |log|w|| bounded on the window
        assert!(g.values.iter().all(|x| x.is_finite() && x.abs() <= 500.0 + 4.7));
        // on the line w = 0 exactly
        let on_line = clamped_value(ap, PhasePoint::new(2.0, -2.0), &small(2, 2));
        assert!((on_line - (0.01f64.ln() + 200.0)).abs() < 1e-9);
    }

    #[test]
    fn overdamped_clamp_is_configurable() {
        let ap = OscParams::<f64>::one_d(1.0, 1.1).unwrap().axis(0);
        let zeta = (1.1f64 * 1.1 - 1.0).sqrt();
        // ζu + w = 0 at u = 1
        let p = PhasePoint::new(1.0, -zeta - 1.1);
        let a = clamped_value(ap, p, &small(2, 2));
        let b = clamped_value(
            ap,
            p,
            &GridSpec {
                clamp_threshold: Some(0.1),
                ..small(2, 2)
            },
        );
        assert!(a.is_finite() && b.is_finite() && a > b);
    }

    #[test]
    fn bilinear_is_exact_for_affine_data() {
        let spec = small(11, 7);
        let mut values = Vec::new();
        for j in 0..spec.nv {
            for i in 0..spec.nu {
                values.push(2.0 * spec.u_at(i) - 0.5 * spec.v_at(j) + 1.0);
            }
        }
        let g = Grid { spec, values };
        for &(u, v) in &[(0.13, -2.2), (-5.0, 5.0), (4.99, -4.7)] {
            assert!((g.interpolate(u, v).unwrap() - (2.0 * u - 0.5 * v + 1.0)).abs() < 1e-12);
        }
        assert!(g.interpolate(5.1, 0.0).is_none());
    }
}
