use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("department has no agents")]
    EmptyDepartment,

    #[error("duplicate agent label `{0}`")]
    DuplicateAgent(String),

    #[error("unknown agent `{0}`")]
    UnknownAgent(String),

    #[error("unknown role tag `{0}` (expected `chair` or `coordinator`)")]
    UnknownRole(String),

    #[error("criterion `{criterion}` has invalid value {value} for agent `{agent}`")]
    NegativeCriterion {
        criterion: String,
        agent: String,
        value: f64,
    },

    #[error("pair criterion `{0}` has no matching per-agent criterion to normalize by")]
    UnnormalizedPairCriterion(String),

    #[error("department defines no productivity criteria")]
    NoCriteria,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("productivity vector already carries role adjustments")]
    AlreadyAdjusted,

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Positions are zero-based agent indices.
    #[error("non-positive weight {value:.6} between agents at positions {} and {}", .i + 1, .j + 1)]
    NonPositiveWeight { i: usize, j: usize, value: f64 },

    #[error("agent at position {} has productivity {p:.6} above the merit reference {reference:.6}", .i + 1)]
    ProductivityAboveReference { i: usize, p: f64, reference: f64 },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),

    #[error("graph is disconnected (lambda_2 = {0:e})")]
    Disconnected(f64),

    #[error("linear system is not positive definite")]
    NotPositiveDefinite,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed input: {0}")]
    Malformed(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_)
            | Error::NonPositiveWeight { .. }
            | Error::ProductivityAboveReference { .. } => 3,
            Error::NoConvergence(_)
            | Error::Disconnected(_)
            | Error::NotPositiveDefinite => 4,
            _ => 2,
        }
    }
}
