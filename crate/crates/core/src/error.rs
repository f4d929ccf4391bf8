use thiserror::Error;

/// Errors raised by the likelihood machinery.
#[derive(Debug, Clone, Error)]
pub enum ElError {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sample size {n} must exceed estimating-function dimension {q}")]
    SampleTooSmall { n: usize, q: usize },

    /// `theta` lies outside the OEL domain. `direction` satisfies
    /// `direction . g_i >= 0` for every observation.
    #[error("theta is outside the empirical likelihood domain")]
    DomainViolation { direction: Vec<f64> },

    #[error("{what} did not converge after {iterations} iterations (last residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
        last_iterate: Vec<f64>,
    },

    #[error("rank-deficient matrix: {0}")]
    RankDeficient(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("no preimage found on the segment from the centre to theta (phi(1-) = {phi_end:e})")]
    Surjectivity { phi_end: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl ElError {
    /// Short machine-parsable reason code.
    pub fn code(&self) -> &'static str {
        match self {
            ElError::InvalidDimension(_) => "invalid-dimension",
            ElError::InvalidArgument(_) => "invalid-argument",
            ElError::SampleTooSmall { .. } => "sample-too-small",
            ElError::DomainViolation { .. } => "domain-violation",
            ElError::NonConvergence { .. } => "non-convergence",
            ElError::RankDeficient(_) => "rank-deficient",
            ElError::Unsupported(_) => "unsupported",
            ElError::Surjectivity { .. } => "surjectivity",
            ElError::Parse { .. } => "parse-error",
            ElError::Io(_) => "io-error",
        }
    }
}

impl From<std::io::Error> for ElError {
    fn from(e: std::io::Error) -> Self {
        ElError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, ElError>;
