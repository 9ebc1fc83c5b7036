use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed sequence literal {literal:?}: {reason}")]
    Parse { literal: String, reason: String },

    #[error("read at index {index} exceeds certified depth {certified}")]
    DepthExceeded { index: usize, certified: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("scale exceeded: {what} is {got}, limit {limit}")]
    ScaleExceeded {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("sequence is not (Lambda, tau)-consistent: star at {index} is not followed by tau")]
    Inconsistent { index: usize },

    #[error("kneading sequence is not Lambda-acceptable (failure at n = {index})")]
    NotAcceptable { index: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("pseudo-orbit violation between points {index} and {}", index + 1)]
    OrbitViolation { index: usize },

    #[error("insufficient depth: {0}")]
    Insufficient(String),

    #[error("undecided: diamond at {position} matches the critical tail to depth {depth}")]
    Undecided { position: usize, depth: usize },

    #[error("no chain at scale 2^-{scale} from point {from} to point {to}")]
    NoChain { scale: usize, from: usize, to: usize },

    #[error("partition ambiguity at orbit index {index}: |Im| = {distance:e}")]
    PartitionAmbiguity { index: usize, distance: f64 },

    #[error("parameter is not a Misiurewicz point: {0}")]
    NotMisiurewicz(String),

    #[error("file format: line {line}: {reason}")]
    Format { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
