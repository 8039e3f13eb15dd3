use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Messages are single-line so the CLI can forward them verbatim. Axis fields
/// are zero-based indices; messages number axes from 1, like the CSV columns.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("regime mismatch on axis {}: {operation} requires {required}, found {found}", .axis + 1)]
    RegimeMismatch {
        axis: usize,
        operation: &'static str,
        required: &'static str,
        found: String,
    },

    #[error("mixed damping regimes across axes: {0}")]
    MixedRegimes(String),

    #[error("phase undefined at the origin on axis {}", .axis + 1)]
    PhaseAtOrigin { axis: usize },

    #[error("ambiguous phase jump of {jump:.6} rad between samples; sample more finely")]
    AmbiguousPhaseJump { jump: f64 },

    #[error("sampling too coarse for sheet tracking: dt*omega = {product:.6} must be < pi/2")]
    SamplingTooCoarse { product: f64 },

    #[error("state on natural boundary {line}")]
    OnNaturalBoundary { line: &'static str },

    #[error("singular: {0}")]
    Singular(&'static str),

    #[error("non-positive energy on axis {}", .axis + 1)]
    ZeroEnergy { axis: usize },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("rank-deficient design matrix; collinear features: {}", .features.join(", "))]
    RankDeficient { features: Vec<String> },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("integers {a} and {b} are not coprime")]
    NotCoprime { a: u32, b: u32 },

    #[error("frequencies are not in ratio {a}:{b} with omega_bar = {omega_bar}")]
    NotCommensurate { a: u32, b: u32, omega_bar: f64 },

    #[error("path segment {segment} crosses a natural boundary")]
    PathCrossesBoundary { segment: usize },

    #[error("evaluation failed in path segment {segment}: {message}")]
    PathEvaluation { segment: usize, message: String },

    #[error("quadrature did not converge on segment {segment}")]
    QuadratureDiverged { segment: usize },

    #[error("evaluation failed inside finite-difference stencil: {0}")]
    Stencil(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
