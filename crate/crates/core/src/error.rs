use thiserror::Error;

/// Errors raised by model construction, sampling, approximation and studies.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported sphere dimension d = {0}; only d = 3 is implemented")]
    UnsupportedDimension(u32),

    #[error("eigen-index {index} outside the truncation range (M_spec = {m_spec})")]
    IndexOutOfRange { index: usize, m_spec: usize },

    #[error("Galerkin matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("ill-conditioned system: condition number {condition:e} (min singular value {min_singular_value:e})")]
    IllConditioned {
        condition: f64,
        min_singular_value: f64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("rejection envelope violated: density {density:e} exceeds envelope {envelope:e}")]
    EnvelopeViolation { density: f64, envelope: f64 },

    #[error("rejection cap of {cap} proposals exceeded while placing node {node}")]
    RejectionCapExceeded { node: usize, cap: u64 },

    #[error("conditional density {value:e} is negative beyond tolerance (node {node})")]
    NegativeConditional { node: usize, value: f64 },

    #[error("conditioning event ||G - I|| <= 1/2 not met after {resamples} resamples (last ||G - I|| = {last_deviation:.4})")]
    ResampleBudgetExceeded { resamples: usize, last_deviation: f64 },

    #[error("elementary symmetric polynomial underflow: {0}")]
    EspUnderflow(String),

    #[error("study failed: {failed} of {total} replicates failed at N = {n}")]
    StudyFailureBudget { n: usize, failed: usize, total: usize },

    #[error("cannot fit slope: {0}")]
    SlopeFit(String),

    #[error("output error: {0}")]
    Output(String),
}

pub type Result<T> = std::result::Result<T, Error>;
