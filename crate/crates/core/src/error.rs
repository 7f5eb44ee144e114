use thiserror::Error;

/// Errors raised by the samplers, the noise layer and the estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite input")]
    NonFinite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: {0}")]
    Grid(String),

    #[error("path needs {bytes} bytes, budget is {budget} bytes and streaming is disabled")]
    MemoryBudget { bytes: u128, budget: u64 },

    #[error("sub-step quantization guard violated: h/h_ref = {ratio} < {min}")]
    QuantizationGuard { ratio: u64, min: u64 },

    #[error("stepsize h = {h} exceeds the admissible cap {cap}")]
    StepsizeGuard { h: f64, cap: f64 },

    #[error("noise path exhausted: need {needed} fine steps, path has {available}")]
    NoiseExhausted { needed: u64, available: u64 },

    #[error("reference solution diverged for sample {sample_index}")]
    ReferenceDiverged { sample_index: u64 },

    #[error("missing constants for this regime: {0}")]
    MissingConstants(String),

    #[error("order fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),

    #[error("order fit needs positive errors, got {err} at h = {h}")]
    NonPositiveError { h: f64, err: f64 },

    #[error("empty input")]
    EmptyInput,

    #[error("snapshot schedules differ between chains")]
    RaggedSchedule,
}

pub type Result<T> = std::result::Result<T, Error>;
