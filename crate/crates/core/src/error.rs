use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("graph contains a directed cycle through {0}")]
    Cycle(String),

    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),

    #[error("self-loop on `{0}`")]
    SelfLoop(String),

    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),

    #[error("invalid domain for `{0}`: {1}")]
    InvalidDomain(String, String),

    #[error("vertex sets overlap on `{0}`")]
    Overlap(String),

    #[error("empty variable set in independence statement")]
    EmptySet,

    #[error("unknown outcome `{outcome}` for variable `{variable}`")]
    UnknownOutcome { variable: String, outcome: String },

    #[error("conditioning event has zero probability")]
    ZeroProbabilityEvidence,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid conditional probability table for `{child}`: {reason}")]
    InvalidCpd { child: String, reason: String },

    #[error("structural mismatch: {0}")]
    Structure(String),

    #[error("model has no EPRB role designations")]
    MissingDesignations,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("composed amplitude requires kappa = 1, got {0}")]
    KappaMismatch(f64),

    #[error("perturbation target does not match subject: {0}")]
    TargetMismatch(String),

    #[error("model file: {0}")]
    ModelFile(String),
}
