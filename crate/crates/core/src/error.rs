use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the simulator, diagnostics, or file layer.
#[derive(Debug, Error)]
pub enum PeskinError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("orientation error: enclosed area {area:e} is not positive (curve must be counter-clockwise)")]
    Orientation { area: f64 },

    #[error("degenerate parameterization: {0}")]
    Degenerate(String),

    #[error("invalid tension: {0}")]
    InvalidTension(String),

    #[error("polar parameterization failed: {0}")]
    PolarParameterization(String),

    #[error("step rejected at t = {time}: {reason}")]
    StepRejected { time: f64, reason: String },

    #[error("quadrature health check failed at t = {time}: identity residual {residual:e} exceeds {limit:e}")]
    QuadratureHealth { time: f64, residual: f64, limit: f64 },

    #[error("precondition not met: {0}")]
    Precondition(String),

    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("unknown monitored field `{0}`")]
    UnknownField(String),

    #[error("grid mismatch: file has n = {found}, expected n = {expected} (resample explicitly)")]
    GridMismatch { expected: usize, found: usize },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file {}: {message}", path.display())]
    Format { path: PathBuf, message: String },
}

impl PeskinError {
    /// True for failures that come from the evolution itself (blow-up,
    /// loss of admissibility) rather than from bad input.
    pub fn is_runtime_failure(&self) -> bool {
        matches!(
            self,
            PeskinError::StepRejected { .. }
                | PeskinError::QuadratureHealth { .. }
                | PeskinError::Degenerate(_)
                | PeskinError::Geometry(_)
                | PeskinError::Orientation { .. }
                | PeskinError::PolarParameterization(_)
        )
    }
}

pub type Result<T, E = PeskinError> = std::result::Result<T, E>;
