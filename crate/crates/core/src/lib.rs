//! Constants of motion of the damped harmonic oscillator.
//!
//! The crate recovers the equation of motion `ü + 2γu̇ + ω0²u = 0` from sampled
//! trajectories by feature regression ([`fjet`]), evaluates closed-form
//! constants of motion in one dimension ([`invariants_1d`]) and across axes
//! ([`invariants_nd`]), and checks them numerically ([`verify`]).
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the `*F64` aliases
//! below name the usual double-precision instantiations.

// `!(x > 0)` style checks are how NaN gets rejected alongside bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fjet;
pub mod grid;
pub mod invariants_1d;
pub mod invariants_nd;
pub mod oscillator;
pub mod scalar;
pub mod trajectory;
pub mod verify;

pub use error::{Error, Result};
pub use oscillator::{
    AxisParams, AxisSolution, DampingRegime, DerivedFreq, ExactSolution, OscParams, PhasePoint, State,
};
pub use scalar::{LinalgScalar, Scalar};
pub use trajectory::{DeltaDataset, DeltaRow, NoiseSpec, Sample, SimulationConfig, Trajectory};

pub type OscParamsF64 = OscParams<f64>;
pub type AxisParamsF64 = AxisParams<f64>;
pub type StateF64 = State<f64>;
pub type PhasePointF64 = PhasePoint<f64>;
pub type TrajectoryF64 = Trajectory<f64>;
pub type ExactSolutionF64 = ExactSolution<f64>;
pub type DeltaDatasetF64 = DeltaDataset<f64>;
pub type FJetModelF64 = fjet::FJetModel<f64>;
pub type DEEstimateF64 = fjet::DEEstimate<f64>;
pub type ModeQuantitiesF64 = invariants_nd::ModeQuantities<f64>;
pub type WedgeConstantsF64 = invariants_nd::WedgeConstants<f64>;
pub type ConstancyReportF64 = verify::ConstancyReport<f64>;
pub type GridSpecF64 = grid::GridSpec<f64>;
pub type GridF64 = grid::Grid<f64>;

pub type OscParamsF32 = OscParams<f32>;
pub type StateF32 = State<f32>;
pub type TrajectoryF32 = Trajectory<f32>;
pub type FJetModelF32 = fjet::FJetModel<f32>;
