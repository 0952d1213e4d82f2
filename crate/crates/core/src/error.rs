use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("repeated index {0} in excitation string")]
    RepeatedIndex(usize),
    #[error("index {index} out of range for {role}")]
    BadIndex { index: usize, role: &'static str },
    #[error("hole and particle lists differ in length ({holes} vs {particles})")]
    LengthMismatch { holes: usize, particles: usize },
    #[error("invalid basis: {0}")]
    InvalidBasis(String),
    #[error("invalid excitation: {0}")]
    InvalidExcitation(String),
    #[error("excitation rank {got} outside the allowed range {expected}")]
    RankMismatch { got: usize, expected: String },
    #[error("dimension {dim} exceeds the dense limit {limit}")]
    TooLarge { dim: usize, limit: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("inconsistent integrals: {0}")]
    InconsistentIntegrals(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("vanishing MP2 denominator for {0}")]
    DegenerateDenominator(String),
    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("aborted: support {support} exceeds guard {limit}")]
    Aborted { support: usize, limit: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
