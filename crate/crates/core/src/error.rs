use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("quadrature with {points} points cannot resolve order {max_order} (need at least {})", max_order + 1)]
    UnderResolved { points: usize, max_order: usize },

    #[error("{kind} has no closed-form spectrum")]
    NoClosedForm { kind: String },

    #[error("invalid activation spec `{spec}`: {reason}")]
    ActivationSpec { spec: String, reason: String },

    #[error("invalid design profile: {0}")]
    Profile(String),

    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    Dimension {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    #[error("non-square jacobian ({rows}x{cols}) at layer {layer}; enable the singular-value fallback")]
    NonSquareJacobian {
        layer: usize,
        rows: usize,
        cols: usize,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("singular normal equations at ridge lambda {lambda}; increase lambda")]
    Singular { lambda: f64 },

    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("non-finite values: {0}")]
    NonFinite(String),

    #[error("all candidates failed: {0}")]
    AllCandidatesFailed(String),

    #[error("csv line {line}: {reason}")]
    Csv { line: usize, reason: String },

    #[error("idx: {0}")]
    Idx(String),

    #[error("ratios sum to {sum}, expected 1")]
    RatioSum { sum: f64 },

    #[error("model format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by user input rather than internal failure.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Diverged { .. } | Error::NonFinite(_) | Error::AllCandidatesFailed(_))
    }
}
