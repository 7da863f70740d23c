use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("bandwidth ratio must exceed 1, got {0}")]
    NonPositiveRatio(f64),
    #[error("bandwidth range must satisfy 0 < h_lo < h_hi < 1, got [{lo}, {hi}]")]
    BadRange { lo: f64, hi: f64 },
    #[error("region has zero volume")]
    DegenerateRegion,
    #[error("enlargement radius must be positive, got {0}")]
    NonPositiveAlpha(f64),
    #[error("bandwidth {0} outside the admissible range")]
    BadBandwidth(f64),
    #[error("quadrature produced a non-finite value")]
    QuadratureFailure,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operation only supports d = 1, got d = {0}")]
    DimensionUnsupported(usize),
    #[error("grid needs at least 2 points, got {0}")]
    GridTooCoarse(usize),
    #[error("density value must be positive, got {0}")]
    NonPositiveDensity(f64),
    #[error("sample is empty")]
    EmptySample,
    #[error("sample has zero spread")]
    DegenerateSample,
    #[error("no sign change of the bandwidth equation on [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },
    #[error("direction lies in the null space of the Gram matrix")]
    NullDirection,
    #[error("target functional has J = {0} > 1")]
    TargetOutsideBall(f64),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
