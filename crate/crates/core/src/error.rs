use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("descriptor is empty")]
    EmptyDescriptor,
    #[error("prompt has {count} tokens, generator accepts at most {limit}")]
    TokenBudgetExceeded { count: usize, limit: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("oracle `{oracle}` failed: {message}")]
    OracleFailure { oracle: String, message: String },
    #[error("malformed oracle output: {0:?}")]
    MalformedOracleOutput(String),
    #[error("same-domain mating received parents from different tasks")]
    MixedDomainParents,
    #[error("cross-domain mating requires parents from at least two tasks")]
    SingleDomainParents,

    #[error("generation failed: {0}")]
    GenerationFailure(String),
    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported mesh format: {0}")]
    UnsupportedFormat(String),

    #[error("projection axis has zero length")]
    ZeroAxis,
    #[error("alpha {0} outside [0, 1]")]
    AlphaOutOfRange(f64),
    #[error("visual bounds invalid: lower {lower}, upper {upper}")]
    BoundsInvalid { lower: f64, upper: f64 },

    #[error("individual {0} has no fitness")]
    MissingFitness(usize),
    #[error("individual {0} has no objective vector")]
    MissingObjectives(usize),

    #[error("baseline belongs to task {baseline}, expected task {expected}")]
    TaskMismatch { baseline: usize, expected: usize },
    #[error("no points left inside the reference box")]
    EmptyInput,
    #[error("vocabulary overlap needs at least two tasks with prompts")]
    InsufficientTasks,

    #[error("checkpoint in {path} is missing or corrupt: {message}")]
    CorruptCheckpoint { path: PathBuf, message: String },
    #[error("run in {0} has not completed")]
    IncompleteRun(PathBuf),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn oracle(oracle: impl Into<String>, message: impl Into<String>) -> Self {
        Error::OracleFailure {
            oracle: oracle.into(),
            message: message.into(),
        }
    }
}
