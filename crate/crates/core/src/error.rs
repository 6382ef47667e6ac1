use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("label count mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid ranking: {0}")]
    InvalidRanking(String),

    #[error("label index {index} out of range for {labels} labels")]
    LabelOutOfRange { index: usize, labels: usize },

    #[error("pairwise query needs two distinct labels, got {0} twice")]
    SameLabel(usize),

    #[error("{labels} labels exceeds the enumeration cap of {cap}")]
    EnumerationCap { labels: usize, cap: usize },

    #[error("relation is not a strict order: {0}")]
    NotStrict(String),

    #[error("relation contains a directed cycle")]
    Cyclic,

    #[error("relation is not transitive")]
    NotTransitive,

    #[error("threshold {0} outside [0.5, 1)")]
    InvalidThreshold(f64),

    #[error("no threshold in [0.5, 1) yields an acyclic relation")]
    NoFeasibleThreshold,

    #[error("invalid preference relation: {0}")]
    InvalidRelation(String),

    #[error("invalid model parameters: {0}")]
    InvalidModel(String),

    #[error("empty input")]
    EmptyInput,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
