use thiserror::Error;

/// Errors raised by the solver, its diagnostics and the configuration layer.
#[derive(Debug, Error)]
pub enum FchError {
    #[error("derivative order {0} is not supported (expected 0, 1, 2 or 3)")]
    InvalidOrder(usize),

    #[error("potential hypothesis failed: {0}")]
    Structure(String),

    #[error("{what} is undefined for u = {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("grid of {grid} points per axis cannot resolve {modes} modes per axis (need at least {required})")]
    Aliasing {
        grid: usize,
        modes: usize,
        required: usize,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("dense oracle refuses {modes} modes per axis in {dim}D (cap is {cap})")]
    OracleCap { dim: usize, modes: usize, cap: usize },

    #[error("step failed at t = {t}: dt = {dt} is below dt_min and the energy residual {residual:e} exceeds {tolerance:e}")]
    StepFailure {
        t: f64,
        dt: f64,
        residual: f64,
        tolerance: f64,
    },

    #[error("non-finite field values at t = {t}")]
    NonFinite { t: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, FchError>;
