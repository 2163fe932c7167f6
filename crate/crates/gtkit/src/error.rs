use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum GtError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("sigma quadrature too coarse: {have} nodes, at least {required} required")]
    QuadratureResolution { required: usize, have: usize },

    #[error("step rejected: |dt| = {dt:e} exceeds the admissible {required:e}")]
    StepRejected { dt: f64, required: f64 },

    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error("snapshot format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GtError>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(GtError::Config(msg.into()))
}
