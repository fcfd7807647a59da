use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("trajectory diverged at t = {t}: state norm {norm} exceeds blow-up bound {bound}")]
    Diverged { t: f64, norm: f64, bound: f64 },

    #[error("unknown builtin system `{0}`")]
    UnknownName(String),

    #[error("too many boxes: {requested} requested, cap is {cap}")]
    TooManyBoxes { requested: u128, cap: u64 },

    #[error("incompatible base sampling: {0}")]
    IncompatibleSampling(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("graph format version mismatch: found `{found}`, expected `{expected}`")]
    FormatVersionMismatch { found: String, expected: String },

    #[error("corrupt graph file: {0}")]
    CorruptHeader(String),

    #[error("attractor candidate is not forward invariant (node {node} has a successor outside)")]
    NotForwardInvariant { node: usize },

    #[error("transient set of a pair contains a cycle through node {node}")]
    CycleInTransientSet { node: usize },

    #[error("random probe drew a zero vector {tries} times in a row")]
    DegenerateProbe { tries: usize },

    #[error("no chain found within {max_legs} legs")]
    NotFound { max_legs: usize },

    #[error("pullback coverings never re-entered U within the schedule")]
    NotNested,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::TooManyBoxes { .. } => 2,
            Error::Diverged { .. } => 3,
            Error::FormatVersionMismatch { .. } | Error::CorruptHeader(_) => 4,
            _ => 1,
        }
    }
}
