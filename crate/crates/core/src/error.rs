use thiserror::Error;

/// Why an unstructured covariance estimate could not be used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum SingularReason {
    /// `d >= N`: the sample covariance has rank at most `N - 1`.
    DimensionNotBelowSamples { dim: usize, samples: usize },
    /// Enough samples, but the estimate failed to factor numerically.
    RankDeficient { pivot_index: usize },
}

impl std::fmt::Display for SingularReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SingularReason::DimensionNotBelowSamples { dim, samples } => write!(
                f,
                "dimension d = {dim} is not below the sample size N = {samples} (requires N > d)"
            ),
            SingularReason::RankDeficient { pivot_index } => {
                write!(f, "numerically rank deficient at pivot {pivot_index}")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot_index} = {pivot:e}{})",
        .iteration.map(|i| format!(", flip-flop iteration {i}")).unwrap_or_default())]
    NotPositiveDefinite {
        pivot_index: usize,
        pivot: f64,
        iteration: Option<usize>,
    },

    #[error("matrix is not symmetric (relative asymmetry {relative_asymmetry:e})")]
    NotSymmetric { relative_asymmetry: f64 },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("covariance is singular: {0}")]
    CovarianceSingular(SingularReason),

    #[error("non-Kronecker covariance rejection exhausted after {attempts} draws")]
    RejectionExhausted { attempts: usize },

    #[error("degenerate test: {0}")]
    DegenerateTest(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("shape mismatch at line {line}: {message}")]
    ShapeMismatch { line: usize, message: String },

    #[error("non-finite value at line {line}")]
    NonFiniteValue { line: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotPositiveDefinite { .. } => "not_positive_definite",
            Error::NotSymmetric { .. } => "not_symmetric",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NonFinite { .. } => "non_finite",
            Error::CovarianceSingular(_) => "covariance_singular",
            Error::RejectionExhausted { .. } => "rejection_exhausted",
            Error::DegenerateTest(_) => "degenerate_test",
            Error::InvalidInput(_) => "invalid_input",
            Error::Parse { .. } => "parse_error",
            Error::ShapeMismatch { .. } => "shape_mismatch",
            Error::NonFiniteValue { .. } => "non_finite_value",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
