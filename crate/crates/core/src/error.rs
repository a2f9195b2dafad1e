use thiserror::Error;

pub type AccResult<T> = Result<T, AccError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AccError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("follow-the-leader model undefined at spacing {d_rel} m (guard {d_eps} m)")]
    Singularity { d_rel: f64, d_eps: f64 },

    #[error("QP solver did not converge after {iterations} iterations (KKT residual {residual:e})")]
    SolverNonConvergence { iterations: usize, residual: f64 },

    #[error("insufficient data: {have} samples, need at least {need}")]
    InsufficientData { have: usize, need: usize },

    #[error("identifier training failed: RMSE {rmse:e} exceeds cap {cap:e}")]
    TrainingFailure { rmse: f64, cap: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for AccError {
    fn from(err: std::io::Error) -> Self {
        AccError::Io(err.to_string())
    }
}

pub(crate) fn ensure_finite(name: &str, value: f64) -> AccResult<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(AccError::InvalidState(format!("{name} is not finite ({value})")))
    }
}
