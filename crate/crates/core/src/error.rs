use thiserror::Error;

/// Errors raised by model evaluation, sampling and integration.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("negative time t = {0}")]
    NegativeTime(f64),

    #[error("state must be strictly positive, got ({0}, {1})")]
    NonPositiveState(f64, f64),

    #[error("jump amplitude {amplitude} <= -1 at t = {t}, z = {z}")]
    KernelDomain { t: f64, z: f64, amplitude: f64 },

    #[error("negative jump intensity {0}")]
    NegativeIntensity(f64),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("all {n_paths} paths diverged at dt_max = {dt_max}; reduce the step size")]
    AllDiverged { n_paths: usize, dt_max: f64 },
}

pub type Result<T> = std::result::Result<T, ModelError>;
