//! FJet feature regression: models `Δu = h1(u, v; ε)`, `Δv = h2(u, v; ε)` by
//! least squares over a dictionary of monomials, then extrapolates each
//! coefficient ratio `c(ε)/ε` to `ε → 0` to recover the differential equation.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use num_traits::Float;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::oscillator::OscParams;
use crate::scalar::{LinalgScalar, Scalar};
use crate::trajectory::DeltaDataset;

/// Largest tolerated |c₀[h1; v] − 1| before an estimate is flagged.
pub const H1_V_TOLERANCE: f64 = 1e-3;

/// Right-singular-vector weight above which a feature is reported as collinear.
const COLLINEAR_WEIGHT: f64 = 0.1;

/// Monomial `u^pu · v^pv` of a single axis's state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Feature {
    pub pu: u32,
    pub pv: u32,
}

impl Feature {
    pub const U: Feature = Feature { pu: 1, pv: 0 };
    pub const V: Feature = Feature { pu: 0, pv: 1 };

    pub fn monomial(pu: u32, pv: u32) -> Self {
        Self { pu, pv }
    }

    pub fn eval<T: Scalar>(&self, u: T, v: T) -> T {
        // powi takes i32; exponents here are tiny
        u.powi(self.pu as i32) * v.powi(self.pv as i32)
    }

    pub fn name(&self) -> String {
        let part = |sym: &str, p: u32| match p {
            0 => None,
            1 => Some(sym.to_string()),
            _ => Some(format!("{sym}^{p}")),
        };
        match (part("u", self.pu), part("v", self.pv)) {
            (None, None) => "1".into(),
            (Some(a), None) | (None, Some(a)) => a,
            (Some(a), Some(b)) => format!("{a}*{b}"),
        }
    }
}

impl Serialize for Feature {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

/// Ordered, duplicate-free feature dictionary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct FeatureSet(Vec<Feature>);

impl FeatureSet {
    pub fn new(features: Vec<Feature>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::InvalidParams("feature set is empty".into()));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = features.iter().find(|f| !seen.insert(**f)) {
            return Err(Error::InvalidParams(format!("duplicate feature {}", dup.name())));
        }
        Ok(Self(features))
    }

    /// `{u, v}`.
    pub fn linear() -> Self {
        Self(vec![Feature::U, Feature::V])
    }

    /// `{u, v, u², uv, v²}`.
    pub fn quadratic() -> Self {
        Self(vec![
            Feature::U,
            Feature::V,
            Feature::monomial(2, 0),
            Feature::monomial(1, 1),
            Feature::monomial(0, 2),
        ])
    }

    pub fn features(&self) -> &[Feature] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn position(&self, f: Feature) -> Option<usize> {
        self.0.iter().position(|g| *g == f)
    }

    pub fn names(&self) -> Vec<String> {
        self.0.iter().map(Feature::name).collect()
    }

    /// Feature values at `(u, v)`, in dictionary order.
    pub fn evaluate<T: Scalar>(&self, u: T, v: T) -> Vec<T> {
        self.0.iter().map(|f| f.eval(u, v)).collect()
    }

    /// `Σ c_j f_j(u, v)`.
    pub fn combine<T: Scalar>(&self, coeffs: &[T], u: T, v: T) -> T {
        self.0
            .iter()
            .zip(coeffs)
            .fold(T::zero(), |acc, (f, &c)| acc + c * f.eval(u, v))
    }
}

impl Default for FeatureSet {
    fn default() -> Self {
        Self::quadratic()
    }
}

/// Least-squares solution for several right-hand sides sharing one design matrix.
#[derive(Debug, Clone)]
pub(crate) struct LstsqSolution<T> {
    pub coeffs: Vec<Vec<T>>,
    pub std_errors: Option<Vec<Vec<T>>>,
    pub rss: Vec<T>,
    pub condition_number: T,
}

/// Solves `min ‖X c − y‖` for each `y` through an SVD of the column-normalized
/// design. Rank deficiency is reported with the features spanning the null space.
pub(crate) fn lstsq<T: LinalgScalar>(
    design: &DMatrix<T>,
    targets: &[DVector<T>],
    names: &[String],
) -> Result<LstsqSolution<T>> {
    let (m, n) = design.shape();
    if m < n {
        return Err(Error::InsufficientData(format!("{m} rows for {n} unknowns")));
    }
    let norms: Vec<T> = design.column_iter().map(|c| c.norm()).collect();
    let zero_cols: Vec<String> = norms
        .iter()
        .zip(names)
        .filter(|(nrm, _)| !(**nrm > T::zero()))
        .map(|(_, name)| name.clone())
        .collect();
    if !zero_cols.is_empty() {
        return Err(Error::RankDeficient { features: zero_cols });
    }
    let mut scaled = design.clone();
    for (mut col, &nrm) in scaled.column_iter_mut().zip(&norms) {
        col /= nrm;
    }
    let svd = scaled.svd(true, true);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let sigma = &svd.singular_values;
    let s_max = sigma.iter().copied().fold(T::zero(), Float::max);
    let s_min = sigma.iter().copied().fold(Float::infinity(), Float::min);
    let tol = T::from_count(m.max(n)) * <T as Float>::epsilon() * s_max;
    if !(s_min > tol) {
        let mut collinear = Vec::new();
        for (i, &s) in sigma.iter().enumerate() {
            if s > tol {
                continue;
            }
            for (j, name) in names.iter().enumerate() {
                if Float::abs(v_t[(i, j)]) > T::lit(COLLINEAR_WEIGHT) && !collinear.contains(name) {
                    collinear.push(name.clone());
                }
            }
        }
        return Err(Error::RankDeficient { features: collinear });
    }

    let dof = m - n;
    let mut coeffs = Vec::with_capacity(targets.len());
    let mut std_errors = Vec::with_capacity(targets.len());
    let mut rss_all = Vec::with_capacity(targets.len());
    for y in targets {
        let uty = u.transpose() * y;
        let scaled_sol =
            v_t.transpose() * DVector::from_iterator(n, uty.iter().zip(sigma.iter()).map(|(&a, &s)| a / s));
        let c: Vec<T> = scaled_sol.iter().zip(&norms).map(|(&x, &nrm)| x / nrm).collect();
        let resid = design * DVector::from_column_slice(&c) - y;
        let rss = resid.norm_squared();
        if dof > 0 {
            let s2 = rss / T::from_count(dof);
            let se = (0..n)
                .map(|j| {
                    let var = (0..n).fold(T::zero(), |acc, i| {
                        let vij = v_t[(i, j)];
                        acc + vij * vij / (sigma[i] * sigma[i])
                    });
                    Float::sqrt(s2 * var) / norms[j]
                })
                .collect();
            std_errors.push(se);
        }
        coeffs.push(c);
        rss_all.push(rss);
    }
    Ok(LstsqSolution {
        coeffs,
        std_errors: (dof > 0).then_some(std_errors),
        rss: rss_all,
        condition_number: s_max / s_min,
    })
}

/// Fit of one axis: coefficients of `h1` and `h2` per feature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisFit<T> {
    pub h1: Vec<T>,
    pub h2: Vec<T>,
    pub h1_std_errors: Option<Vec<T>>,
    pub h2_std_errors: Option<Vec<T>>,
    pub residual_rms: T,
    pub condition_number: T,
}

/// Feature-regression model for one step size `ε`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FJetModel<T> {
    pub eps: T,
    pub features: FeatureSet,
    pub axes: Vec<AxisFit<T>>,
}

impl<T: Scalar> FJetModel<T> {
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// `(h1, h2)` predicted at `(u, v)` on `axis`.
    pub fn predict(&self, axis: usize, u: T, v: T) -> (T, T) {
        let fit = &self.axes[axis];
        (
            self.features.combine(&fit.h1, u, v),
            self.features.combine(&fit.h2, u, v),
        )
    }

    /// Lie generators `η ≈ h1/ε`, `η⁽¹⁾ ≈ h2/ε`.
    pub fn generators(&self, axis: usize, u: T, v: T) -> (T, T) {
        let (h1, h2) = self.predict(axis, u, v);
        (h1 / self.eps, h2 / self.eps)
    }

    /// Root-mean-square residual over all axes and both targets.
    pub fn residual_rms(&self) -> T {
        let n = T::from_count(self.axes.len());
        (self
            .axes
            .iter()
            .fold(T::zero(), |acc, a| acc + a.residual_rms * a.residual_rms)
            / n)
            .sqrt()
    }
}

/// Fits `h1` and `h2` for every axis of a Δ-dataset.
pub fn fit_feature_regression<T: LinalgScalar>(ds: &DeltaDataset<T>, fs: &FeatureSet) -> Result<FJetModel<T>> {
    let rows = ds.len();
    if rows < fs.len() {
        return Err(Error::InsufficientData(format!(
            "{rows} rows for {} features",
            fs.len()
        )));
    }
    let names = fs.names();
    let axes = (0..ds.dim())
        .map(|k| {
            let design = DMatrix::from_fn(rows, fs.len(), |i, j| {
                let r = &ds.rows[i];
                fs.features()[j].eval(r.u[k], r.v[k])
            });
            let du = DVector::from_iterator(rows, ds.rows.iter().map(|r| r.du[k]));
            let dv = DVector::from_iterator(rows, ds.rows.iter().map(|r| r.dv[k]));
            let sol = lstsq(&design, &[du, dv], &names)?;
            let [h1, h2]: [Vec<T>; 2] = sol.coeffs.try_into().expect("two targets");
            let (h1_se, h2_se) = match sol.std_errors {
                Some(se) => {
                    let [a, b]: [Vec<T>; 2] = se.try_into().expect("two targets");
                    (Some(a), Some(b))
                }
                None => (None, None),
            };
            let rms = Float::sqrt((sol.rss[0] + sol.rss[1]) / T::from_count(2 * rows));
            Ok(AxisFit {
                h1,
                h2,
                h1_std_errors: h1_se,
                h2_std_errors: h2_se,
                residual_rms: rms,
                condition_number: sol.condition_number,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FJetModel {
        eps: ds.eps,
        features: fs.clone(),
        axes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Target {
    H1,
    H2,
}

/// Quadratic fit `c(ε)/ε = c₀ + c₁ε + c₂ε²` of one coefficient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientExtrapolation<T> {
    pub target: Target,
    pub feature: Feature,
    pub intercept: T,
    pub slope: T,
    pub curvature: T,
    /// `None` when there are only three step sizes.
    pub intercept_std_error: Option<T>,
    /// `c(ε)/ε` at each step size, in the order of `DEEstimate::eps`.
    pub ratios: Vec<T>,
}

/// Recovered differential-equation parameters of one axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisEstimate<T> {
    pub omega0_sq: T,
    pub two_gamma: T,
    /// c₀[h1; v], ideally 1.
    pub h1_v: T,
    /// c₀[h1; u], ideally 0.
    pub h1_u: T,
    pub flags: Vec<String>,
    pub coefficients: Vec<CoefficientExtrapolation<T>>,
}

impl<T: Scalar> AxisEstimate<T> {
    pub fn is_flagged(&self) -> bool {
        !self.flags.is_empty()
    }

    fn intercepts(&self, target: Target) -> Vec<T> {
        self.coefficients
            .iter()
            .filter(|c| c.target == target)
            .map(|c| c.intercept)
            .collect()
    }
}

/// Result of extrapolating a family of FJet models to `ε → 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DEEstimate<T> {
    pub eps: Vec<T>,
    pub features: FeatureSet,
    pub axes: Vec<AxisEstimate<T>>,
}

impl<T: Scalar> DEEstimate<T> {
    /// Generators `(η, η⁽¹⁾)` of the extrapolated model at `(u, v)`.
    pub fn generators(&self, axis: usize, u: T, v: T) -> (T, T) {
        let a = &self.axes[axis];
        (
            self.features.combine(&a.intercepts(Target::H1), u, v),
            self.features.combine(&a.intercepts(Target::H2), u, v),
        )
    }

    /// Oscillator parameters implied by the estimate; `γ` is the mean over axes,
    /// clipped at zero.
    pub fn recovered_params(&self) -> Result<OscParams<T>> {
        if let Some((k, a)) = self.axes.iter().enumerate().find(|(_, a)| a.is_flagged()) {
            return Err(Error::InvalidParams(format!(
                "axis {k} estimate flagged: {}",
                a.flags.join("; ")
            )));
        }
        let omega0 = self.axes.iter().map(|a| a.omega0_sq.sqrt()).collect();
        let n = T::from_count(self.axes.len());
        let gamma = self.axes.iter().fold(T::zero(), |acc, a| acc + a.two_gamma) / (T::two() * n);
        OscParams::new(omega0, gamma.max(T::zero()))
    }
}

/// Extrapolates coefficient ratios of models fitted at ≥ 3 distinct step sizes.
pub fn extrapolate_to_zero<T: LinalgScalar>(models: &[FJetModel<T>]) -> Result<DEEstimate<T>> {
    let first = models
        .first()
        .ok_or_else(|| Error::InsufficientData("no models to extrapolate".into()))?;
    let mut distinct: Vec<T> = models.iter().map(|m| m.eps).collect();
    distinct.sort_by(|a, b| a.partial_cmp(b).expect("finite step sizes"));
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} distinct step sizes; at least 3 required",
            distinct.len()
        )));
    }
    for m in models {
        if m.features != first.features {
            return Err(Error::InvalidParams("models use different feature sets".into()));
        }
        if m.dim() != first.dim() {
            return Err(Error::DimensionMismatch {
                expected: first.dim(),
                got: m.dim(),
            });
        }
    }
    let fs = &first.features;
    let (iu, iv) = match (fs.position(Feature::U), fs.position(Feature::V)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::InvalidParams("feature set must contain u and v".into())),
    };

    let eps: Vec<T> = models.iter().map(|m| m.eps).collect();
    let design = DMatrix::from_fn(models.len(), 3, |i, j| Float::powi(eps[i], j as i32));
    let names: Vec<String> = ["1", "eps", "eps^2"].iter().map(|s| s.to_string()).collect();

    let mut axes = Vec::with_capacity(first.dim());
    for k in 0..first.dim() {
        let mut coefficients = Vec::with_capacity(2 * fs.len());
        for target in [Target::H1, Target::H2] {
            for (j, &feature) in fs.features().iter().enumerate() {
                let ratios: Vec<T> = models
                    .iter()
                    .map(|m| {
                        let c = match target {
                            Target::H1 => m.axes[k].h1[j],
                            Target::H2 => m.axes[k].h2[j],
                        };
                        c / m.eps
                    })
                    .collect();
                let y = DVector::from_column_slice(&ratios);
                let sol = lstsq(&design, &[y], &names)?;
                let c = &sol.coeffs[0];
                coefficients.push(CoefficientExtrapolation {
                    target,
                    feature,
                    intercept: c[0],
                    slope: c[1],
                    curvature: c[2],
                    intercept_std_error: sol.std_errors.map(|se| se[0][0]),
                    ratios,
                });
            }
        }
        let nf = fs.len();
        let omega0_sq = -coefficients[nf + iu].intercept;
        let two_gamma = -coefficients[nf + iv].intercept;
        let h1_v = coefficients[iv].intercept;
        let h1_u = coefficients[iu].intercept;
        let mut flags = Vec::new();
        if !(omega0_sq > T::zero()) {
            flags.push(format!("non-positive omega0^2 = {omega0_sq}"));
        }
        if !(Float::abs(h1_v - T::one()) <= T::lit(H1_V_TOLERANCE)) {
            flags.push(format!("h1 coefficient of v extrapolates to {h1_v}, expected 1"));
        }
        axes.push(AxisEstimate {
            omega0_sq,
            two_gamma,
            h1_v,
            h1_u,
            flags,
            coefficients,
        });
    }
    Ok(DEEstimate {
        eps,
        features: fs.clone(),
        axes,
    })
}

/// Models for each stride plus their extrapolation, as written by `oscinv fit`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport<T> {
    pub models: Vec<FJetModel<T>>,
    pub estimate: DEEstimate<T>,
}
