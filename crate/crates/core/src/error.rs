use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A constructor-level invariant (unitarity, hermiticity, finiteness) failed.
    #[error("{kind} invariant violated: {detail}")]
    Invariant { kind: &'static str, detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigendecomposition failed: {0}")]
    Decomposition(String),

    #[error("function is not differentiable at theta = {theta}")]
    NotDifferentiable { theta: f64 },

    #[error("kernel grid does not match the spectral decomposition: {0}")]
    GridMismatch(String),

    #[error("eigenphase tracking exhausted refinement depth on s in [{s_start}, {s_end}]")]
    TrackingDepth { s_start: f64, s_end: f64 },

    #[error("numerical check failed: {0}")]
    CheckFailed(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Decomposition(_)
            | Error::NotDifferentiable { .. }
            | Error::TrackingDepth { .. }
            | Error::CheckFailed(_) => 3,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::Invariant { .. } => "invariant",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Decomposition(_) => "decomposition",
            Error::NotDifferentiable { .. } => "not_differentiable",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::TrackingDepth { .. } => "tracking_depth",
            Error::CheckFailed(_) => "check_failed",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
