use alloc::string::String;

/// Errors produced by the algorithmic core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{what}: need at least {needed} points, got {got}")]
    TooFewPoints {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("unknown image id {0}")]
    UnknownImage(u32),

    #[error(
        "marker seen in {got} image(s); the minimum requirement for scale estimation is N_J >= 2"
    )]
    InsufficientObservations { got: usize },

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("linear solve failed at iteration {iteration}: {reason}")]
    Solver { iteration: usize, reason: String },

    #[error("graph is not a tree: {0}")]
    NotATree(String),
}

impl Error {
    /// True for failures caused by the numbers rather than by the inputs' shape.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Degenerate(_) | Error::Solver { .. })
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
