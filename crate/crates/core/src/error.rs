use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },
    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not complex symmetric (asymmetry {0:e})")]
    NotComplexSymmetric(f64),
    #[error("matrix is not skew-symmetric (asymmetry {0:e})")]
    NotSkewSymmetric(f64),
    #[error("matrix is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("matrix is numerically singular")]
    SingularInput,
    #[error("nearest rotation is not unique: {0}")]
    DegenerateProjection(String),
    #[error("point is outside the tubular neighbourhood: {0}")]
    OutsideTube(String),
    #[error("singular-value gap condition violated: {0}")]
    RankGapViolation(String),
    #[error("points are antipodal (cut locus)")]
    CutLocus,
    #[error("vector is not tangent (normal component {0:e})")]
    NotTangent(f64),
    #[error("argument outside domain: {0}")]
    DomainError(String),
    #[error("prior density is not positive (value {0:e})")]
    NonPositiveDensity(f64),
    #[error("invalid prior: {0}")]
    PriorInvalid(String),
    #[error("tau form is singular")]
    SingularTau,
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("antipodal data pairs persist at the final iterate: {0:?}")]
    AntipodalData(Vec<usize>),
    #[error("at least {required} samples required, got {found}")]
    TooFewSamples { required: usize, found: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of an otherwise well-posed computation, as opposed to bad input.
    pub fn is_computational(&self) -> bool {
        matches!(self, Error::NoConvergence { .. } | Error::AntipodalData(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
