use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the model.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Matsubara sum or node budget exhausted before the requested tolerance.
    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error("degenerate kernel denominator (|D| = {value:e}, floor = {floor:e})")]
    DegenerateDenominator { value: f64, floor: f64 },

    /// No stable equilibrium (non-positive curvature) where one was required.
    #[error("unstable configuration: {0}")]
    Instability(String),

    #[error("unknown material `{0}`")]
    UnknownMaterial(String),

    /// A grid point of a sweep failed; wraps the underlying error.
    #[error("grid point {index} failed: {source}")]
    GridPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Strips any `GridPoint` wrappers.
    pub fn root_cause(&self) -> &Error {
        match self {
            Error::GridPoint { source, .. } => source.root_cause(),
            other => other,
        }
    }
}
