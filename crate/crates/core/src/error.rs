use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// Variants mirror the error names used in reports and in the CLI's JSON
/// error line; [`Error::kind`] returns that stable name.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    OutOfDomain(String),
    #[error("matrix is not strictly conditionally negative definite")]
    NotConditionallyNegativeDefinite,
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("dimension {dim} exceeds the supported maximum {max}")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("integer overflow")]
    Overflow,
    #[error("expected {expected} block values, got {got}")]
    MissingBlockValue { expected: usize, got: usize },
    #[error("block value for subset {subset:#b} is not finite")]
    NonFiniteBlockValue { subset: u32 },
    #[error("adaptive quadrature hit the subdivision limit (estimate {estimate}, error {error})")]
    MaxSubdivisions { estimate: f64, error: f64 },
    #[error("integrand returned a non-finite value")]
    NonFiniteIntegrand,
    #[error("normal CDF did not reach the target accuracy (estimate {estimate}, error {error})")]
    CdfNotConverged { estimate: f64, error: f64 },
    #[error("negative block derivative {value} for subset {subset:#b}")]
    NegativeDensityTerm { subset: u32, value: f64 },
    #[error("point is not on the requested simplex face")]
    NotOnFace,
    #[error("operation not supported for model {0}")]
    UnsupportedModel(String),
    #[error("spatial parameters are not identifiable: all pairwise distances are equal")]
    NotIdentifiable,
    #[error("partition sum is not positive")]
    NonPositivePartitionSum,
    #[error("log-likelihood underflowed at row {row}")]
    LikelihoodUnderflow { row: usize },
    #[error("unsupported method: {0}")]
    UnsupportedMethod(String),
    #[error("optimizer could not improve on the starting point")]
    NoImprovement,
    #[error("optimizer reached the iteration limit")]
    MaxIterations,
    #[error("dataset is empty")]
    EmptyData,
    #[error("information matrix is singular (minimum eigenvalue {min_eigenvalue})")]
    Singular { min_eigenvalue: f64 },
    #[error("exact sampler exceeded {0} inner proposals")]
    IterationGuard(usize),
    #[error("envelope ratio is unbounded on the grid at {witness:?}")]
    Infeasible { witness: Vec<f64> },
    #[error("{failed} of {total} replications failed to converge")]
    TooManyFailures { failed: usize, total: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::OutOfDomain(_) => "OutOfDomain",
            Error::NotConditionallyNegativeDefinite => "NotConditionallyNegativeDefinite",
            Error::NotPositiveDefinite(_) => "NotPositiveDefinite",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::NonFinite(_) => "NonFinite",
            Error::DimensionTooLarge { .. } => "DimensionTooLarge",
            Error::Overflow => "Overflow",
            Error::MissingBlockValue { .. } => "MissingBlockValue",
            Error::NonFiniteBlockValue { .. } => "NonFiniteBlockValue",
            Error::MaxSubdivisions { .. } => "MaxSubdivisions",
            Error::NonFiniteIntegrand => "NonFiniteIntegrand",
            Error::CdfNotConverged { .. } => "CdfNotConverged",
            Error::NegativeDensityTerm { .. } => "NegativeDensityTerm",
            Error::NotOnFace => "NotOnFace",
            Error::UnsupportedModel(_) => "UnsupportedModel",
            Error::NotIdentifiable => "NotIdentifiable",
            Error::NonPositivePartitionSum => "NonPositivePartitionSum",
            Error::LikelihoodUnderflow { .. } => "LikelihoodUnderflow",
            Error::UnsupportedMethod(_) => "UnsupportedMethod",
            Error::NoImprovement => "NoImprovement",
            Error::MaxIterations => "MaxIterations",
            Error::EmptyData => "EmptyData",
            Error::Singular { .. } => "Singular",
            Error::IterationGuard(_) => "IterationGuard",
            Error::Infeasible { .. } => "Infeasible",
            Error::TooManyFailures { .. } => "TooManyFailures",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Io(_) => "IoError",
            Error::Parse(_) => "ParseError",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
