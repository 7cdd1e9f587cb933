use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FmmError {
    #[error("particle set is empty")]
    EmptyInput,

    #[error("{what}: expected {expected} entries, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// All sources of a box coincide while more levels are still required.
    #[error("degenerate input: {count} coincident sources in box {box_index} at level {level}")]
    DegenerateInput {
        level: usize,
        box_index: usize,
        count: usize,
    },

    #[error("singular {0}: zero distance between expansion center and point")]
    Singular(&'static str),

    #[error("error metric undefined: every exact value is zero")]
    UndefinedMetric,
}

pub type Result<T> = std::result::Result<T, FmmError>;
