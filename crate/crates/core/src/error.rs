use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid box: lower corner {lo:?} exceeds upper corner {hi:?}")]
    InvalidBox { lo: Vec<i64>, hi: Vec<i64> },

    #[error("minkowski sum of {left} and {right} is not representable")]
    UnrepresentableSum { left: String, right: String },

    #[error("shift {shift:?} does not map the domain into itself")]
    ShiftLeavesDomain { shift: Vec<i64> },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("value array has {found} entries, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("stored value at {index:?} lies outside the declared domain")]
    SupportOutsideDomain { index: Vec<i64> },

    #[error("invalid envelope: {0}")]
    InvalidEnvelope(String),

    #[error("value kind mismatch: {0}")]
    KindMismatch(String),

    #[error("coordinate {axis} is zero while the domain contains positive indices on that axis")]
    ZeroCoordinate { axis: usize },

    #[error("point lies outside the convergence region (tail bound diverges)")]
    PointOutsideRegion,

    #[error("sequence has no envelope")]
    NoEnvelope,

    #[error("axis {axis} is two-sided but the envelope has no negative-side rate")]
    TwoSidedAxisWithoutRingRates { axis: usize },

    #[error("unsupported domain for this operation: {0}")]
    UnsupportedDomain(String),

    #[error("boundary of the shifted sum is not finite")]
    BoundaryNotFinite,

    #[error("modulation base has a zero component on axis {axis}")]
    ZeroModulation { axis: usize },

    #[error("more than one non-scalar factor in a separable product")]
    MultipleNonScalarFactors,

    #[error("integration circle of radius {radius} on axis {axis} leaves the region of analyticity")]
    CircleOutsideRegion { axis: usize, radius: f64 },

    #[error("grid size {grid} on axis {axis} is smaller than the window span {span}")]
    InsufficientGrid { axis: usize, grid: usize, span: usize },

    #[error("evaluator failed at node {node:?}: {source}")]
    EvaluatorFailure { node: Vec<usize>, source: Box<Error> },

    #[error("convolution sum diverges at {index:?}")]
    DivergentConvolution { index: Vec<i64> },

    #[error("truncation bound {bound:e} at {index:?} exceeds tolerance {tolerance:e}")]
    TruncationExceedsTolerance { index: Vec<i64>, bound: f64, tolerance: f64 },

    #[error("invalid convolution axes: {0}")]
    InvalidAxes(String),

    #[error("fractional order must be non-negative, got {0}")]
    NegativeOrder(f64),

    #[error("window reads index {index:?} outside the stored data")]
    WindowOutsideData { index: Vec<i64> },

    #[error("symbol is singular at z = {z:?} (reciprocal condition {rcond:e})")]
    SingularSymbol { z: Vec<Complex64>, rcond: f64 },

    #[error("right-hand side violates the zero initial condition at {index:?}")]
    InitialConditionViolated { index: Vec<i64> },

    #[error("window too small: {0}")]
    InsufficientWindow(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    }
}
